#include "hypercell/runner.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "hypercell/error.hpp"

namespace hypercell::cli {

namespace {

/// Delivers finished blocks to the sink in block order and releases their
/// geometry when the caller does not want it.
class OrderedSink {
 public:
  OrderedSink(std::vector<std::vector<Drawn>>& blocks, const DrawOptions& opt) : blocks_(blocks), opt_(opt) {
    done_.assign(blocks.size(), false);
  }

  void finish(std::int64_t b) {
    std::lock_guard lock(mu_);
    done_[b] = true;
    while (next_ < done_.size() && done_[next_]) {
      auto& block = blocks_[next_];
      if (opt_.sink) opt_.sink(block);
      if (!opt_.keep_cells)
        for (auto& d : block) d.sample.cell = ConvexCell{};
      ++next_;
    }
  }

 private:
  std::vector<std::vector<Drawn>>& blocks_;
  const DrawOptions& opt_;
  std::vector<bool> done_;
  std::size_t next_ = 0;
  std::mutex mu_;
};

std::vector<Drawn> flatten(std::vector<std::vector<Drawn>>& blocks) {
  std::size_t total = 0;
  for (const auto& b : blocks) total += b.size();
  std::vector<Drawn> out;
  out.reserve(total);
  for (auto& b : blocks)
    for (auto& d : b) out.push_back(std::move(d));
  return out;
}

}  // namespace

void merge_into(DropCounters& into, const DropCounters& from) {
  for (const auto& [k, v] : from) into[k] += v;
}

void parallel_blocks(std::int64_t blocks, int workers, const std::function<void(std::int64_t)>& job) {
  const int w = std::max(1, std::min<int>(workers, static_cast<int>(std::max<std::int64_t>(blocks, 1))));
  if (w == 1) {
    for (std::int64_t b = 0; b < blocks; ++b) job(b);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  for (int i = 0; i < w; ++i) {
    pool.emplace_back([&] {
      for (;;) {
        const std::int64_t b = next.fetch_add(1);
        if (b >= blocks) return;
        try {
          job(b);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
          next.store(blocks);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<Drawn> draw_inball(const ProcessParams& params, std::int64_t n, const std::optional<Conditioning>& cond,
                               const DrawOptions& opt, DropCounters& drops) {
  const std::int64_t nblocks = (n + kBlockSize - 1) / kBlockSize;
  std::vector<std::vector<Drawn>> blocks(nblocks);
  std::vector<DropCounters> block_drops(nblocks);
  OrderedSink sink(blocks, opt);
  parallel_blocks(nblocks, opt.workers, [&](std::int64_t b) {
    const std::uint64_t stream = opt.stream_base + static_cast<std::uint64_t>(b);
    const RandomStream base(opt.seed, stream);
    const std::int64_t count = std::min(kBlockSize, n - b * kBlockSize);
    auto& out = blocks[b];
    auto& dr = block_drops[b];
    out.reserve(count);
    AcceptanceStats acc;
    ConditionedStats cstats;
    // A degenerate slot is dropped and counted; the block moves on to the
    // next slot rather than redrawing from the same one.
    std::uint64_t slot = 0;
    std::int64_t dropped = 0;
    while (static_cast<std::int64_t>(out.size()) < count) {
      if (dropped >= kStallProposals) throw Error(Errc::RejectionStall, "every proposal degenerated");
      RandomStream rng = base.substream(slot);
      try {
        TypicalCellSample s =
            cond ? sample_conditioned_inball(params, *cond, rng, &cstats) : sample_typical_cell_inball(params, {}, rng, &acc);
        out.push_back({stream, slot, std::move(s)});
      } catch (const Error& e) {
        if (e.code() != Errc::DegenerateSample) throw;
        ++dropped;
      }
      ++slot;
    }
    dr["degenerate_sample"] += dropped;
    dr["direction_proposals_outside_P"] += acc.outside_p;
    dr["direction_proposals_rejected"] += acc.proposals - acc.accepted - acc.outside_p;
    dr["span_test_ambiguous"] += acc.span.ambiguous;
    if (cond) dr["conditioning_rejections"] += cstats.proposals - cstats.accepted;
    sink.finish(b);
  });
  for (const auto& d : block_drops) merge_into(drops, d);
  return flatten(blocks);
}

std::vector<Drawn> draw_window_cells(const ProcessParams& params, double window_R, std::int64_t min_cells,
                                     const DrawOptions& opt, DropCounters& drops,
                                     std::optional<double> inradius_below) {
  std::vector<std::vector<Drawn>> all;
  std::int64_t collected = 0;
  std::int64_t window0 = 0;
  // Rounds of blocks: how many rounds run depends only on cell counts, never
  // on the worker count.
  while (collected < min_cells) {
    const std::int64_t round = std::max<std::int64_t>(opt.workers, 1);
    std::vector<std::vector<Drawn>> blocks(round);
    std::vector<std::int64_t> dropped(round, 0);
    parallel_blocks(round, opt.workers, [&](std::int64_t b) {
      for (std::int64_t w = 0; w < kWindowBlock; ++w) {
        const std::uint64_t stream = opt.stream_base + static_cast<std::uint64_t>(window0 + b * kWindowBlock + w);
        RandomStream rng(opt.seed, stream);
        auto cells = sample_window_tessellation(params, window_R, rng, 0.1, &dropped[b], inradius_below);
        for (std::size_t i = 0; i < cells.size(); ++i) blocks[b].push_back({stream, i, std::move(cells[i])});
      }
    });
    // Blocks past the one that reaches min_cells are discarded so that the
    // output is the same for every worker count.
    for (std::int64_t b = 0; b < round && collected < min_cells; ++b) {
      collected += static_cast<std::int64_t>(blocks[b].size());
      drops["window_degenerate_cell"] += dropped[b];
      all.push_back(std::move(blocks[b]));
    }
    window0 += round * kWindowBlock;
  }
  std::vector<std::vector<Drawn>> ordered = std::move(all);
  OrderedSink sink(ordered, opt);
  for (std::size_t b = 0; b < ordered.size(); ++b) sink.finish(static_cast<std::int64_t>(b));
  drops["windows"] += static_cast<std::int64_t>(ordered.size()) * kWindowBlock;
  return flatten(ordered);
}

std::vector<Drawn> draw_window_independent(const ProcessParams& params, double window_R, std::int64_t n,
                                           const DrawOptions& opt, DropCounters& drops) {
  const std::int64_t per_block = 100;
  const std::int64_t nblocks = (n + per_block - 1) / per_block;
  std::vector<std::vector<Drawn>> blocks(nblocks);
  std::vector<std::int64_t> windows(nblocks, 0), dropped(nblocks, 0);
  OrderedSink sink(blocks, opt);
  parallel_blocks(nblocks, opt.workers, [&](std::int64_t b) {
    const std::uint64_t stream = opt.stream_base + static_cast<std::uint64_t>(b);
    const RandomStream base(opt.seed, stream);
    const std::int64_t count = std::min(per_block, n - b * per_block);
    for (std::int64_t slot = 0; slot < count; ++slot) {
      RandomStream rng = base.substream(static_cast<std::uint64_t>(slot));
      blocks[b].push_back({stream, static_cast<std::uint64_t>(slot),
                           sample_window_cell(params, window_R, rng, 0.1, &windows[b], &dropped[b])});
    }
    sink.finish(b);
  });
  for (std::int64_t b = 0; b < nblocks; ++b) {
    drops["windows"] += windows[b];
    drops["window_degenerate_cell"] += dropped[b];
  }
  return flatten(blocks);
}

std::vector<TypicalCellSample> samples_of(std::vector<Drawn> drawn) {
  std::vector<TypicalCellSample> out;
  out.reserve(drawn.size());
  for (auto& d : drawn) out.push_back(std::move(d.sample));
  return out;
}

}  // namespace hypercell::cli
