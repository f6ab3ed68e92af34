#pragma once

#include "fbgsp/autodiff.hpp"
#include "fbgsp/data_io.hpp"
#include "fbgsp/dataset.hpp"
#include "fbgsp/eigensolver.hpp"
#include "fbgsp/error.hpp"
#include "fbgsp/graph.hpp"
#include "fbgsp/matrix.hpp"
#include "fbgsp/models.hpp"
#include "fbgsp/random.hpp"
#include "fbgsp/serialize.hpp"
#include "fbgsp/smoothness.hpp"
#include "fbgsp/spectral.hpp"
#include "fbgsp/training.hpp"
