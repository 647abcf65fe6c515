#pragma once

#include <chainsim/chain/block_store.hpp>
#include <chainsim/kernel/sim_time.hpp>

#include <cstdint>

namespace chainsim {

struct DifficultyParams {
    std::uint32_t retarget_interval = 2016;
    SimTime target_spacing = SimTime::from_seconds_int(600);
    double max_adjustment = 4.0; // per-retarget factor clamped to [1/max, max]

    SimTime target_timespan() const { return SimTime{target_spacing.micros * retarget_interval}; }
};

/// Difficulty as seen from one chain tip.
struct DifficultyState {
    double current = 1.0;
    SimTime epoch_start;
    std::uint32_t epoch_block_count = 0; // in [0, retarget_interval)
};

/// current x clamp(target_timespan / elapsed, 1/max, max). Zero elapsed takes the upper clamp.
double retarget(double current, SimTime epoch_elapsed, const DifficultyParams& params);

/// Difficulty that children of a block at `height`, mined at `created` with
/// difficulty `difficulty` on top of `parent`, must use.
double difficulty_after(const BlockStore& store, BlockId parent, std::uint32_t height, SimTime created,
                        double difficulty, const DifficultyParams& params);

/// Epoch bookkeeping for mining on top of `tip`.
DifficultyState difficulty_state(const BlockStore& store, BlockId tip, const DifficultyParams& params);

} // namespace chainsim
