#include <chainsim/chain/difficulty.hpp>

#include <algorithm>

namespace chainsim {

double retarget(double current, SimTime epoch_elapsed, const DifficultyParams& params)
{
    const double hi = params.max_adjustment;
    const double lo = 1.0 / params.max_adjustment;
    double factor = hi;
    if (epoch_elapsed.micros > 0) {
        factor = static_cast<double>(params.target_timespan().micros) / static_cast<double>(epoch_elapsed.micros);
    }
    return current * std::clamp(factor, lo, hi);
}

double difficulty_after(const BlockStore& store, BlockId parent, std::uint32_t height, SimTime created,
                        double difficulty, const DifficultyParams& params)
{
    if (height == 0 || height % params.retarget_interval != 0) return difficulty;
    const std::uint32_t start_height = height - params.retarget_interval;
    const Block& start = store.get(start_height == height - 1 ? parent : store.ancestor(parent, start_height));
    return retarget(difficulty, created - start.created, params);
}

DifficultyState difficulty_state(const BlockStore& store, BlockId tip, const DifficultyParams& params)
{
    const Block& b = store.get(tip);
    DifficultyState state;
    state.current = b.next_difficulty;
    state.epoch_block_count = b.height % params.retarget_interval;
    const std::uint32_t start_height = b.height - state.epoch_block_count;
    state.epoch_start = store.get(store.ancestor(tip, start_height)).created;
    return state;
}

} // namespace chainsim
