#include "scc.h"

#include <algorithm>
#include <cstdint>

namespace dfmsynth::internal {

std::vector<std::size_t> scc_ids(std::size_t n, const std::vector<std::vector<std::size_t>>& adj) {
  std::vector<std::size_t> index(n, SIZE_MAX), low(n, 0), comp(n, SIZE_MAX);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::size_t counter = 0;
  std::size_t comps = 0;

  struct Frame {
    std::size_t node;
    std::size_t next_child;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != SIZE_MAX) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.next_child < adj[f.node].size()) {
        std::size_t m = adj[f.node][f.next_child++];
        if (index[m] == SIZE_MAX) {
          index[m] = low[m] = counter++;
          stack.push_back(m);
          on_stack[m] = true;
          call.push_back({m, 0});
        } else if (on_stack[m]) {
          low[f.node] = std::min(low[f.node], index[m]);
        }
        continue;
      }
      if (low[f.node] == index[f.node]) {
        std::size_t m;
        do {
          m = stack.back();
          stack.pop_back();
          on_stack[m] = false;
          comp[m] = comps;
        } while (m != f.node);
        ++comps;
      }
      std::size_t done = f.node;
      call.pop_back();
      if (!call.empty()) low[call.back().node] = std::min(low[call.back().node], low[done]);
    }
  }
  return comp;
}

}  // namespace dfmsynth::internal
