#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include "crdsa/config_file.hpp"
#include "crdsa/format.hpp"
#include "crdsa/plr.hpp"
#include "crdsa/simulator.hpp"
#include "crdsa/stability.hpp"

namespace crdsa::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kDefaultSeed = 1;

struct CommonOptions {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    unsigned workers = 0;
};

/// Exit with a code after the manifest has been written.
struct CommandFailure {
    int code;
    std::string message;
};

/// Collects output files and writes manifest.json for one command.
class Run {
public:
    Run(std::string command, const CommonOptions& common, std::ostream& out, std::ostream& err)
        : command_(std::move(command)), common_(common), out_(out), err_(err)
    {
        manifest_["command"] = command_;
        manifest_["config_path"] = common.config_path;
        manifest_["output_dir"] = common.out_dir;
        manifest_["seed"] = nullptr;
        manifest_["flags"] = json::object();
        manifest_["artifacts"] = json::array();
    }

    std::ostream& out() { return out_; }
    ScenarioFile& scenario() { return scenario_; }
    std::uint64_t seed() const { return seed_; }
    Parallelism parallelism() const { return {common_.workers}; }

    void flag(const std::string& name, json value) { manifest_["flags"][name] = std::move(value); }

    /// `# crdsa <command> ...` line carrying the config fingerprint and seed.
    std::string csv_header() const
    {
        return "# crdsa " + command_ + " fingerprint=" + fingerprint_ + " seed=" + std::to_string(seed_) +
               " config=" + description_ + "\n";
    }

    void emit(const std::string& file, const std::string& content)
    {
        const auto path = fs::path(common_.out_dir) / file;
        std::ofstream stream(path, std::ios::binary);
        stream << content;
        if (!stream)
            throw std::runtime_error("cannot write '" + path.string() + "'");
        json artifact;
        artifact["file"] = file;
        artifact["fingerprint"] = fingerprint_hash(content);
        artifact["inputs"] = {{"config_fingerprint", fingerprint_},
                              {"seed", seed_},
                              {"flags", manifest_["flags"]}};
        manifest_["artifacts"].push_back(std::move(artifact));
    }

    int execute(const std::function<void(Run&)>& body, bool validate_policy)
    {
        int code = kSuccess;
        try {
            load(validate_policy);
            fs::create_directories(common_.out_dir);
            body(*this);
            manifest_["status"] = "ok";
        } catch (const CommandFailure& failure) {
            err_ << "error: " << failure.message << '\n';
            manifest_["status"] = failure.code == kInvalidConfig ? "invalid_config" : "failed";
            manifest_["error"] = failure.message;
            code = failure.code;
        } catch (const CurveMismatch& e) {
            err_ << "error: " << e.what() << '\n';
            manifest_["status"] = "invalid_config";
            manifest_["error"] = e.what();
            code = kInvalidConfig;
        } catch (const std::exception& e) {
            err_ << "error: " << e.what() << '\n';
            manifest_["status"] = "failed";
            manifest_["error"] = e.what();
            code = kRuntimeFailure;
        }
        write_manifest();
        return code;
    }

private:
    void load(bool validate_policy)
    {
        try {
            scenario_ = load_scenario(common_.config_path);
        } catch (const ConfigParseError& e) {
            throw CommandFailure{kInvalidConfig, e.what()};
        }
        seed_ = common_.seed.value_or(scenario_.seed.value_or(kDefaultSeed));
        manifest_["seed"] = seed_;
        refresh_fingerprint();

        const auto violations = validate_policy ? validate(scenario_.channel, scenario_.policy)
                                                : validate(scenario_.channel);
        if (!violations.empty()) {
            json list = json::array();
            for (const auto& v : violations) {
                err_ << "violation: " << v.to_string() << '\n';
                list.push_back({{"field", v.field}, {"rule", v.rule}});
            }
            manifest_["violations"] = list;
            throw CommandFailure{kInvalidConfig, std::to_string(violations.size()) + " configuration violation(s)"};
        }
    }

public:
    void refresh_fingerprint()
    {
        description_ = describe(scenario_.channel, scenario_.policy);
        fingerprint_ = fingerprint_hash(description_);
        manifest_["config_fingerprint"] = fingerprint_;
        manifest_["config"] = description_;
    }

private:
    void write_manifest()
    {
        std::error_code ec;
        fs::create_directories(common_.out_dir, ec);
        std::ofstream stream(fs::path(common_.out_dir) / "manifest.json", std::ios::binary);
        stream << manifest_.dump(2) << '\n';
        if (!stream)
            err_ << "warning: cannot write manifest.json\n";
    }

    std::string command_;
    CommonOptions common_;
    std::ostream& out_;
    std::ostream& err_;
    ScenarioFile scenario_;
    std::uint64_t seed_ = kDefaultSeed;
    std::string description_;
    std::string fingerprint_;
    json manifest_;
};

struct CurveOptions {
    std::optional<std::string> curve_path;
    std::optional<double> g_max;
    double step = kDefaultGridStep;
    std::uint64_t trials = kDefaultCurveTrials;
};

void add_curve_options(CLI::App& sub, CurveOptions& opts, bool allow_curve_file)
{
    if (allow_curve_file)
        sub.add_option("--curve", opts.curve_path, "Reuse a PLR curve CSV written by `crdsa plr`");
    sub.add_option("--gmax", opts.g_max, "Largest tabulated load (default: covers the population and 3x peak)");
    sub.add_option("--step", opts.step, "Grid step in packets/slot")->check(CLI::PositiveNumber);
    sub.add_option("--trials", opts.trials, "Frames per grid point")->check(CLI::PositiveNumber);
}

/// Reads --curve or builds one; a built curve covers the load ceiling of `channel`.
PlrCurve obtain_curve(Run& run, const CurveOptions& opts, const ChannelConfig& channel)
{
    if (opts.curve_path) {
        run.flag("curve", *opts.curve_path);
        std::ifstream in(*opts.curve_path);
        if (!in)
            throw std::runtime_error("cannot open curve file '" + *opts.curve_path + "'");
        auto curve = read_plr_csv(in);
        curve.require_compatible(channel);
        return curve;
    }
    run.flag("step", opts.step);
    run.flag("trials", opts.trials);
    PlrCurve curve;
    if (opts.g_max) {
        run.flag("gmax", *opts.g_max);
        curve = build_plr_curve(channel, *opts.g_max, opts.step, opts.trials, run.seed(), run.parallelism());
    } else {
        curve = build_default_plr_curve(channel, run.seed(), opts.trials, opts.step, run.parallelism());
    }
    std::ostringstream csv;
    write_plr_csv(curve, csv);
    run.emit("plr.csv", csv.str());
    return curve;
}

std::string equilibria_csv(const Run& run, const ChannelClass& channel)
{
    std::ostringstream csv;
    csv << run.csv_header() << "g_in,g_t,n_b,kind\n";
    for (const auto& e : channel.equilibria)
        csv << format_real(e.g_in) << ',' << format_real(e.g_t) << ',' << format_real(e.n_b) << ','
            << to_string(e.kind) << '\n';
    return csv.str();
}

std::string summary_line(const ChannelClass& channel, double grid_step)
{
    std::ostringstream line;
    line << to_string(channel.kind) << " equilibria=" << channel.equilibria.size();
    if (const auto* op = channel.operating_point())
        line << " operating_g_t=" << format_real(op->g_t) << " operating_n_b=" << format_real(op->n_b);
    if (const auto* u = channel.unstable_point())
        line << " unstable_n_b=" << format_real(u->n_b);
    line << " grid_step=" << format_real(grid_step);
    return line.str();
}

std::vector<unsigned> parse_thresholds(const std::string& text)
{
    std::vector<unsigned> out;
    if (text.find(':') != std::string::npos) {
        unsigned start = 0, stop = 0, step = 0;
        char c1 = 0, c2 = 0;
        std::istringstream in(text);
        if (!(in >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' || step == 0 || stop < start)
            throw CLI::ValidationError("--thresholds", "expected start:stop:step, got '" + text + "'");
        for (unsigned t = start; t <= stop; t += step)
            out.push_back(t);
        return out;
    }
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ','))
        out.push_back(static_cast<unsigned>(std::stoul(item)));
    if (out.empty())
        throw CLI::ValidationError("--thresholds", "no thresholds given");
    return out;
}

std::vector<double> parse_values(const std::string& text)
{
    std::vector<double> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ','))
        out.push_back(std::stod(item));
    return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Slotted Aloha / CRDSA stability analysis and frame-level simulation"};
    app.require_subcommand(1);

    CommonOptions common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", common.config_path, "Scenario file (key = value)")->required();
        sub->add_option("--out", common.out_dir, "Output directory");
        sub->add_option("--seed", common.seed, "Root seed (overrides the config file)");
        sub->add_option("--workers", common.workers, "Worker threads (0 = all cores); never changes results");
    };

    CurveOptions curve_opts;

    auto* plr = app.add_subcommand("plr", "Tabulate PLR versus offered load");
    add_common(plr);
    add_curve_options(*plr, curve_opts, false);

    auto* contour = app.add_subcommand("contour", "Equilibrium contour g_in,g_t,n_b");
    add_common(contour);
    add_curve_options(*contour, curve_opts, true);

    auto* classify = app.add_subcommand("classify", "Equilibrium points and channel class");
    add_common(classify);
    add_curve_options(*classify, curve_opts, true);

    std::string design_param;
    std::string design_values;
    auto* design = app.add_subcommand("design", "Reclassify the channel across values of M, p0 or p_r");
    add_common(design);
    add_curve_options(*design, curve_opts, true);
    design->add_option("--param", design_param, "M, p0 or p_r")->required();
    design->add_option("--values", design_values, "Comma-separated values")->required();

    std::optional<std::uint64_t> frames;
    std::uint64_t trace_stride = kDefaultTraceStride;
    auto* simulate = app.add_subcommand("simulate", "Closed-loop frame simulation");
    add_common(simulate);
    simulate->add_option("--frames", frames, "Frames to simulate (default: config, else 100000)");
    simulate->add_option("--trace", trace_stride, "Record every n-th frame in trace.csv (0 = no trace)");

    std::string sweep_policy;
    std::string sweep_thresholds;
    std::optional<double> sweep_p_c;
    auto* sweep = app.add_subcommand("sweep", "Throughput and critical-state rate versus policy threshold");
    add_common(sweep);
    sweep->add_option("--policy", sweep_policy, "icp or rcp")->required()->check(CLI::IsMember({"icp", "rcp"}));
    sweep->add_option("--thresholds", sweep_thresholds, "List `a,b,c` or range `start:stop:step`")->required();
    sweep->add_option("--p_c", sweep_p_c, "Critical retransmission probability for rcp (default: config p_c)");
    sweep->add_option("--frames", frames, "Frames per run (default: config, else 100000)");

    std::vector<const char*> argv{"crdsa"};
    for (const auto& a : args)
        argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kRuntimeFailure;
    }

    auto frames_for = [&](const ScenarioFile& s) { return frames.value_or(s.frames.value_or(kDefaultFrames)); };

    if (plr->parsed()) {
        Run r("plr", common, out, err);
        return r.execute(
            [&](Run& run) {
                const auto curve = obtain_curve(run, curve_opts, run.scenario().channel);
                run.out() << "plr.csv: " << curve.samples.size() << " samples, g_max=" << format_real(curve.g_max())
                          << ", peak load=" << format_real(peak_throughput_load(curve)) << '\n';
            },
            false);
    }

    if (contour->parsed()) {
        Run r("contour", common, out, err);
        return r.execute(
            [&](Run& run) {
                const auto& channel = run.scenario().channel;
                const auto curve = obtain_curve(run, curve_opts, run.scenario().channel);
                const auto c = equilibrium_contour(curve, channel.p_r, channel.n_slots);
                std::ostringstream csv;
                csv << run.csv_header() << "g_in,g_t,n_b\n";
                for (const auto& p : c.points)
                    csv << format_real(p.g_in) << ',' << format_real(p.g_t) << ',' << format_real(p.n_b) << '\n';
                run.emit("contour.csv", csv.str());
                run.out() << "contour.csv: " << c.points.size() << " points\n";
            },
            false);
    }

    if (classify->parsed()) {
        Run r("classify", common, out, err);
        return r.execute(
            [&](Run& run) {
                const auto curve = obtain_curve(run, curve_opts, run.scenario().channel);
                const auto result = analyze_channel(curve, run.scenario().channel);
                const auto csv = equilibria_csv(run, result);
                run.emit("equilibria.csv", csv);
                run.out() << summary_line(result, curve.grid_step) << '\n' << csv;
            },
            false);
    }

    if (design->parsed()) {
        Run r("design", common, out, err);
        return r.execute(
            [&](Run& run) {
                run.flag("param", design_param);
                run.flag("values", design_values);
                const auto parameter = parse_sweep_parameter(design_param);
                const auto values = parse_values(design_values);
                // The curve must reach the load ceiling of the largest value swept.
                const auto& base = run.scenario().channel;
                ChannelConfig widest = base;
                for (double v : values) {
                    if (parameter == SweepParameter::RetransmissionProbability)
                        widest.p_r = std::max(widest.p_r, v);
                    if (auto* finite = std::get_if<FinitePopulation>(&widest.population)) {
                        if (parameter == SweepParameter::Users)
                            finite->users = std::max(finite->users, static_cast<unsigned>(v));
                        if (parameter == SweepParameter::ArrivalProbability)
                            finite->p0 = std::max(finite->p0, v);
                    }
                }
                const auto curve = obtain_curve(run, curve_opts, widest);
                const auto points = sweep_parameter(curve, base, parameter, values);
                std::ostringstream csv;
                csv << run.csv_header() << "value,class,equilibria,unstable_n_b\n";
                for (const auto& p : points) {
                    const auto* u = p.channel.unstable_point();
                    csv << format_real(p.value) << ',' << to_string(p.channel.kind) << ','
                        << p.channel.equilibria.size() << ',' << (u ? format_real(u->n_b) : std::string()) << '\n';
                }
                run.emit("design.csv", csv.str());
                run.out() << csv.str();
            },
            false);
    }

    if (simulate->parsed()) {
        Run r("simulate", common, out, err);
        return r.execute(
            [&](Run& run) {
                auto& s = run.scenario();
                const auto n_frames = frames_for(s);
                run.flag("frames", n_frames);
                run.flag("trace", trace_stride);
                const auto metrics = run_simulation(s.channel, s.policy, n_frames, run.seed(), trace_stride);
                std::ostringstream csv;
                csv << run.csv_header();
                write_metrics_csv(metrics, csv);
                run.emit("metrics.csv", csv.str());
                if (trace_stride != 0) {
                    std::ostringstream trace;
                    trace << run.csv_header();
                    write_trace_csv(metrics, trace);
                    run.emit("trace.csv", trace.str());
                }
                run.out() << "avg_throughput=" << format_real(metrics.avg_throughput)
                          << " percent_critical=" << format_real(metrics.percent_critical)
                          << " rejected_arrivals=" << metrics.rejected_arrivals << " final_n_b=" << metrics.final_n_b
                          << '\n';
            },
            true);
    }

    if (sweep->parsed()) {
        Run r("sweep", common, out, err);
        return r.execute(
            [&](Run& run) {
                auto& s = run.scenario();
                const auto thresholds = parse_thresholds(sweep_thresholds);
                const auto family = sweep_policy == "icp" ? PolicyFamily::Input : PolicyFamily::Retransmission;
                double p_c = 0.0;
                if (family == PolicyFamily::Retransmission) {
                    if (sweep_p_c)
                        p_c = *sweep_p_c;
                    else if (const auto* rcp = std::get_if<RetransmissionControl>(&s.policy))
                        p_c = rcp->p_c;
                    else
                        throw CommandFailure{kInvalidConfig, "rcp sweep needs --p_c or p_c in the config"};
                    const auto violations = validate(s.channel, RetransmissionControl{thresholds.front(), p_c});
                    if (!violations.empty())
                        throw CommandFailure{kInvalidConfig, violations.front().to_string()};
                    s.policy = RetransmissionControl{thresholds.front(), p_c};
                } else {
                    s.policy = InputControl{thresholds.front()};
                }
                run.refresh_fingerprint();
                const auto n_frames = frames_for(s);
                run.flag("policy", sweep_policy);
                run.flag("thresholds", sweep_thresholds);
                run.flag("frames", n_frames);
                if (family == PolicyFamily::Retransmission)
                    run.flag("p_c", p_c);
                const auto rows =
                    sweep_threshold(s.channel, family, thresholds, p_c, n_frames, run.seed(), run.parallelism());
                std::ostringstream csv;
                csv << run.csv_header();
                write_sweep_csv(rows, csv);
                run.emit("sweep.csv", csv.str());
                run.out() << csv.str();
            },
            true);
    }
    return kRuntimeFailure;
}

}  // namespace crdsa::cli
