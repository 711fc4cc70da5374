#include "crdsa/simulator.hpp"

#include <stdexcept>

#include "crdsa/format.hpp"

namespace crdsa {

PopulationState PopulationState::initial(const ChannelConfig& config)
{
    if (const auto* finite = std::get_if<FinitePopulation>(&config.population))
        return {finite->users, 0};
    return {0, 0};
}

PopulationState step_frame(const PopulationState& state, const ChannelConfig& config, const Policy& policy,
                           RandomStream& rng, FrameWorkspace& workspace, FrameRecord& record)
{
    const auto threshold = policy_threshold(policy);
    const bool critical = threshold && state.backlogged > *threshold;

    std::uint64_t arrivals;
    if (const auto* finite = std::get_if<FinitePopulation>(&config.population))
        arrivals = rng.binomial(state.thinking, finite->p0);
    else
        arrivals = rng.poisson(std::get<InfinitePopulation>(config.population).lambda);

    std::uint64_t rejected = 0;
    if (critical && std::holds_alternative<InputControl>(policy)) {
        rejected = arrivals;
        arrivals = 0;
    }

    double p_retx = config.p_r;
    if (critical)
        if (const auto* rcp = std::get_if<RetransmissionControl>(&policy))
            p_retx = rcp->p_c;
    const auto retransmissions = rng.binomial(state.backlogged, p_retx);

    const auto attempted = arrivals + retransmissions;
    place_replicas_into(workspace.layout, attempted, config.degrees, config.n_slots, rng);
    const auto decoded = workspace.decoder.count_decoded(workspace.layout, config.i_max);

    // Successful owners become thinking; failed new packets join the backlog.
    PopulationState next;
    next.backlogged = state.backlogged + arrivals - decoded;
    next.thinking = config.is_finite() ? state.thinking + state.backlogged - next.backlogged : 0;

    record.attempted = attempted;
    record.decoded = decoded;
    record.n_b = next.backlogged;
    record.critical = critical;
    record.new_packets = arrivals;
    record.rejected = rejected;
    return next;
}

SimMetrics run_simulation(const ChannelConfig& config, const Policy& policy, std::uint64_t frames,
                          std::uint64_t seed, std::uint64_t trace_stride)
{
    require_valid(config, policy);
    if (frames == 0)
        throw std::invalid_argument("run_simulation needs at least one frame");

    RandomStream rng(seed, 0);
    FrameWorkspace workspace;
    PopulationState state = PopulationState::initial(config);
    SimMetrics metrics;
    metrics.frames = frames;
    if (trace_stride != 0)
        metrics.trace.reserve(static_cast<std::size_t>(frames / trace_stride + 1));

    const auto tail_start = frames > kTailFrames ? frames - kTailFrames : 0;
    std::uint64_t tail_decoded = 0;
    FrameRecord record;
    for (std::uint64_t f = 0; f < frames; ++f) {
        record.frame = f;
        state = step_frame(state, config, policy, rng, workspace, record);
        metrics.decoded_total += record.decoded;
        metrics.critical_frames += record.critical ? 1 : 0;
        metrics.rejected_arrivals += record.rejected;
        if (f >= tail_start)
            tail_decoded += record.decoded;
        if (trace_stride != 0 && f % trace_stride == 0)
            metrics.trace.push_back(record);
    }
    metrics.final_n_b = state.backlogged;
    metrics.avg_throughput =
        static_cast<double>(metrics.decoded_total) / (static_cast<double>(frames) * config.n_slots);
    metrics.tail_throughput =
        static_cast<double>(tail_decoded) / (static_cast<double>(frames - tail_start) * config.n_slots);
    metrics.percent_critical = 100.0 * static_cast<double>(metrics.critical_frames) / static_cast<double>(frames);
    return metrics;
}

std::vector<ThresholdRow> sweep_threshold(const ChannelConfig& config, PolicyFamily family,
                                          const std::vector<unsigned>& thresholds, double p_c,
                                          std::uint64_t frames, std::uint64_t seed, Parallelism parallelism)
{
    if (thresholds.empty())
        throw std::invalid_argument("sweep_threshold needs at least one threshold");
    auto policy_for = [&](unsigned threshold) -> Policy {
        if (family == PolicyFamily::Input)
            return InputControl{threshold};
        return RetransmissionControl{threshold, p_c};
    };
    require_valid(config, policy_for(thresholds.front()));

    std::vector<ThresholdRow> rows(thresholds.size());
    parallel_blocks(thresholds.size(), parallelism, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto m = run_simulation(config, policy_for(thresholds[i]), frames, seed, 0);
            rows[i] = {thresholds[i], m.avg_throughput, m.percent_critical, m.rejected_arrivals, m.final_n_b,
                       m.tail_throughput};
        }
    });
    return rows;
}

void write_metrics_csv(const SimMetrics& metrics, std::ostream& out)
{
    out << "frames,avg_throughput,percent_critical,rejected_arrivals,final_n_b\n"
        << metrics.frames << ',' << format_real(metrics.avg_throughput) << ','
        << format_real(metrics.percent_critical) << ',' << metrics.rejected_arrivals << ',' << metrics.final_n_b
        << '\n';
}

void write_trace_csv(const SimMetrics& metrics, std::ostream& out)
{
    out << "f,attempted,decoded,n_b,critical\n";
    for (const auto& r : metrics.trace)
        out << r.frame << ',' << r.attempted << ',' << r.decoded << ',' << r.n_b << ',' << (r.critical ? 1 : 0)
            << '\n';
}

void write_sweep_csv(const std::vector<ThresholdRow>& rows, std::ostream& out)
{
    out << "n_hat,avg_throughput,percent_critical,rejected_arrivals,final_n_b,tail_throughput\n";
    for (const auto& r : rows)
        out << r.threshold << ',' << format_real(r.avg_throughput) << ',' << format_real(r.percent_critical) << ','
            << r.rejected_arrivals << ',' << r.final_n_b << ',' << format_real(r.tail_throughput) << '\n';
}

}  // namespace crdsa
