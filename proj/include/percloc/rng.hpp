#pragma once

// Counter-based randomness: every variate is a pure function of
// (master seed, trial index, edge key, salt), so results are bit-identical
// under any parallel schedule and any query order.

#include <cstdint>

#include "graphs.hpp"

namespace percloc {

inline uint64_t trial_stream(uint64_t master_seed, uint64_t trial) {
    return mix64(master_seed ^ mix64(trial + 0x632be59bd9b4e019ULL));
}

inline double u01(uint64_t bits) {
    return double(bits >> 11) * 0x1.0p-53;
}

// Uniform variate attached to one edge within one trial stream.
inline double edge_uniform(uint64_t stream, const EdgeKey& e, uint64_t salt = 0) {
    return u01(mix64(stream ^ mix64(edge_key_hash64(e) + salt)));
}

inline bool edge_open(uint64_t stream, const EdgeKey& e, double p, uint64_t salt = 0) {
    return edge_uniform(stream, e, salt) < p;
}

}  // namespace percloc
