#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "crdsa/core.hpp"
#include "crdsa/decoder.hpp"
#include "crdsa/parallel.hpp"
#include "crdsa/random_stream.hpp"

namespace crdsa {

/// User population at a frame boundary. For an infinite population only the
/// backlog is meaningful and `thinking` stays 0.
struct PopulationState {
    std::uint64_t thinking = 0;
    std::uint64_t backlogged = 0;

    static PopulationState initial(const ChannelConfig& config);
    bool operator==(const PopulationState&) const = default;
};

struct FrameRecord {
    std::uint64_t frame = 0;
    std::uint64_t attempted = 0;  // packets transmitted in the frame
    std::uint64_t decoded = 0;
    std::uint64_t n_b = 0;        // backlog after feedback
    bool critical = false;        // policy was in its critical action
    std::uint64_t new_packets = 0;
    std::uint64_t rejected = 0;   // arrivals denied by input control

    bool operator==(const FrameRecord&) const = default;
};

/// Per-run scratch storage for placement and decoding. Not shared.
struct FrameWorkspace {
    FrameLayout layout;
    SicDecoder decoder;
};

/// Advances one frame with immediate feedback.
///
/// The policy decision uses the backlog at the start of the frame (left by
/// the previous frame's feedback); the channel is critical when that backlog
/// strictly exceeds the policy threshold. Input control drops the frame's
/// new arrivals while critical (the users stay thinking); retransmission
/// control uses p_c instead of p_r. Degrees are redrawn for every
/// transmission.
PopulationState step_frame(const PopulationState& state, const ChannelConfig& config, const Policy& policy,
                           RandomStream& rng, FrameWorkspace& workspace, FrameRecord& record);

struct SimMetrics {
    std::uint64_t frames = 0;
    std::vector<FrameRecord> trace;  // every trace_stride-th frame
    double avg_throughput = 0.0;     // decoded packets per slot
    double percent_critical = 0.0;
    std::uint64_t rejected_arrivals = 0;
    std::uint64_t final_n_b = 0;
    std::uint64_t decoded_total = 0;
    std::uint64_t critical_frames = 0;
    double tail_throughput = 0.0;    // over the final min(frames, kTailFrames) frames

    bool operator==(const SimMetrics&) const = default;
};

inline constexpr std::uint64_t kDefaultFrames = 100'000;
inline constexpr std::uint64_t kDefaultTraceStride = 100;
inline constexpr std::uint64_t kTailFrames = 10'000;

/// Runs `frames` frames from an all-thinking start on `RandomStream{seed, 0}`.
/// `trace_stride` = 0 disables the trace.
SimMetrics run_simulation(const ChannelConfig& config, const Policy& policy, std::uint64_t frames,
                          std::uint64_t seed, std::uint64_t trace_stride = kDefaultTraceStride);

enum class PolicyFamily { Input, Retransmission };

struct ThresholdRow {
    unsigned threshold = 0;
    double avg_throughput = 0.0;
    double percent_critical = 0.0;
    std::uint64_t rejected_arrivals = 0;
    std::uint64_t final_n_b = 0;
    double tail_throughput = 0.0;

    bool operator==(const ThresholdRow&) const = default;
};

/// One run per threshold, every run on the same seed; rows follow the input
/// order. For retransmission control, `p_c` is the critical probability.
std::vector<ThresholdRow> sweep_threshold(const ChannelConfig& config, PolicyFamily family,
                                          const std::vector<unsigned>& thresholds, double p_c,
                                          std::uint64_t frames, std::uint64_t seed,
                                          Parallelism parallelism = {});

void write_metrics_csv(const SimMetrics& metrics, std::ostream& out);
void write_trace_csv(const SimMetrics& metrics, std::ostream& out);
void write_sweep_csv(const std::vector<ThresholdRow>& rows, std::ostream& out);

}  // namespace crdsa
