#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hypercell/samplers.hpp"

namespace hypercell::cli {

/// A sample with the identifiers that reproduce it:
/// RandomStream(seed, stream).substream(slot) for inball draws, and
/// RandomStream(seed, stream) with slot = index within the window for window
/// cells.
struct Drawn {
  std::uint64_t stream = 0;
  std::uint64_t slot = 0;
  TypicalCellSample sample;
};

/// Named counters of discarded proposals (degenerate geometry, rejection
/// bookkeeping). Merged by addition.
using DropCounters = std::map<std::string, std::int64_t>;

void merge_into(DropCounters& into, const DropCounters& from);

/// Called once per completed block, in block order, before cell geometry
/// is released.
using BlockSink = std::function<void(const std::vector<Drawn>&)>;

struct DrawOptions {
  std::uint64_t seed = 1;
  /// Added to every stream id so that runs sharing a seed stay disjoint.
  std::uint64_t stream_base = 0;
  int workers = 1;
  /// Keep ConvexCell geometry in the returned samples.
  bool keep_cells = false;
  BlockSink sink;
};

/// Samples per block of the inball runner. Part of the reproducibility
/// contract: stream = stream_base + block, slot = substream index within the
/// block.
inline constexpr std::int64_t kBlockSize = 1000;

/// Windows per block of the window runner.
inline constexpr std::int64_t kWindowBlock = 4;

/// Runs `blocks` jobs on `workers` threads; job b writes only its own
/// result, so the outcome does not depend on scheduling.
void parallel_blocks(std::int64_t blocks, int workers, const std::function<void(std::int64_t)>& job);

/// n typical cells from the inball sampler, conditioned on {Σ^{1/k} < a}
/// when `cond` is given. A slot whose sample degenerates is dropped and
/// counted, and the block continues with the next slot.
std::vector<Drawn> draw_inball(const ProcessParams& params, std::int64_t n, const std::optional<Conditioning>& cond,
                               const DrawOptions& opt, DropCounters& drops);

/// All retained cells of whole windows (stream = stream_base + window), in
/// blocks of kWindowBlock windows, until at least `min_cells` cells are
/// collected. With `inradius_below`, only cells with r < a count and are
/// returned.
std::vector<Drawn> draw_window_cells(const ProcessParams& params, double window_R, std::int64_t min_cells,
                                     const DrawOptions& opt, DropCounters& drops,
                                     std::optional<double> inradius_below = std::nullopt);

/// n independent window draws (sample_window_cell), one substream each.
std::vector<Drawn> draw_window_independent(const ProcessParams& params, double window_R, std::int64_t n,
                                           const DrawOptions& opt, DropCounters& drops);

std::vector<TypicalCellSample> samples_of(std::vector<Drawn> drawn);

}  // namespace hypercell::cli
