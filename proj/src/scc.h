#ifndef DFMSYNTH_SRC_SCC_H_
#define DFMSYNTH_SRC_SCC_H_

#include <cstddef>
#include <vector>

namespace dfmsynth::internal {

// Tarjan's strongly connected components; returns a component id per node.
std::vector<std::size_t> scc_ids(std::size_t n, const std::vector<std::vector<std::size_t>>& adj);

}  // namespace dfmsynth::internal

#endif  // DFMSYNTH_SRC_SCC_H_
