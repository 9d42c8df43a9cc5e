#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ridepool {

using NodeId = int;        // 1-based, dense
using RobotId = int;       // 0-based fleet index
using RequestId = long long;
using Seconds = long long;

inline constexpr RobotId kUnassigned = -1;
inline constexpr Seconds kUnsetTime = -1;

// Synthetic (sampled) requests get ids from this base upward so they can
// never collide with ids from request logs.
inline constexpr RequestId kSyntheticIdBase = 1'000'000'000LL;

// Cumulative wait-time cost. A rejection makes the cost unbounded; the
// finite part is kept separate so metrics can still report wait sums.
struct Cost {
    Seconds waits = 0;
    bool unbounded = false;

    static Cost infinite() { return Cost{0, true}; }

    Cost operator+(const Cost& o) const {
        return Cost{waits + o.waits, unbounded || o.unbounded};
    }
    Cost& operator+=(const Cost& o) {
        waits += o.waits;
        unbounded = unbounded || o.unbounded;
        return *this;
    }
    bool operator==(const Cost& o) const {
        if (unbounded || o.unbounded) return unbounded == o.unbounded;
        return waits == o.waits;
    }
    // Unbounded compares greater than every finite cost.
    bool operator<(const Cost& o) const {
        if (unbounded != o.unbounded) return !unbounded;
        if (unbounded) return false;
        return waits < o.waits;
    }
};

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when a simulation reaches a state that violates a structural
// invariant; always indicates a bug, never bad user input.
struct InternalError : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace ridepool
