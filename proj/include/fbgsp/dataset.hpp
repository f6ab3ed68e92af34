#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fbgsp/error.hpp"
#include "fbgsp/graph.hpp"
#include "fbgsp/matrix.hpp"

namespace fbgsp {

/// Node classification dataset: graph, N x F features, labels in [0, C).
struct Dataset {
  std::string name;
  Graph graph;
  Matrix features;
  std::vector<std::size_t> labels;
  std::size_t num_classes = 0;
  /// Self-loop lines skipped by the loader (WebKB files contain a few).
  std::size_t dropped_self_loops = 0;

  std::size_t node_count() const noexcept { return graph.node_count(); }
  std::size_t feature_dim() const noexcept { return features.cols(); }

  void validate() const {
    const std::size_t n = graph.node_count();
    if (features.rows() != n || labels.size() != n)
      throw Error(Errc::InconsistentNodeCount,
                  "graph has " + std::to_string(n) + " nodes, features " +
                      std::to_string(features.rows()) + " rows, labels " + std::to_string(labels.size()));
    detail::require(features.cols() >= 1, Errc::InvalidArgument, "features need at least one column");
    for (std::size_t i = 0; i < n; ++i)
      if (labels[i] >= num_classes)
        throw Error(Errc::LabelOutOfRange, "label " + std::to_string(labels[i]) + " at node " + std::to_string(i));
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

}  // namespace fbgsp
