#include "maxcorr/commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "maxcorr/density.hpp"
#include "maxcorr/detectors.hpp"
#include "maxcorr/io.hpp"
#include "maxcorr/simulation.hpp"

namespace maxcorr {
namespace {

using json = nlohmann::ordered_json;

constexpr const char* kDetectSchema = "maxcorr.detect/1";
constexpr const char* kStreamSchema = "maxcorr.vstream/1";
constexpr const char* kFitSchema = "maxcorr.fit/1";

struct CommonOptions {
    int n = 10;
    int p = 100;
    std::uint64_t seed = 1;
    std::string out = "-";
    std::optional<double> c_override;
};

struct DetectorOptions {
    std::string kind = "robust";
    double jbar = 2.0;
    double j1 = 10.0;
    double m0 = 0.9117;
    double m1 = 0.9467;
    std::optional<double> beta;
    std::optional<double> threshold;
};

// Output sink: stdout stream or a file opened on demand.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) {
        if (path.empty() || path == "-") {
            out_ = &fallback;
            return;
        }
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw InvalidArgument("cannot open output " + path);
        out_ = file_.get();
    }
    std::ostream& operator*() { return *out_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* out_ = nullptr;
};

void add_common(CLI::App* app, CommonOptions& c) {
    app->add_option("--n", c.n, "Rows per batch (>= 5)")->capture_default_str();
    app->add_option("--p", c.p, "Dimension of each observation")->capture_default_str();
    app->add_option("--seed", c.seed, "Master random seed")->capture_default_str();
    app->add_option("--out", c.out, "Output path, '-' for stdout")->capture_default_str();
    app->add_option("--C", c.c_override, "Override the normalizing constant C");
}

void add_detector(CLI::App* app, DetectorOptions& d, bool with_false_alarm) {
    app->add_option("--detector", d.kind, "robust | nonrobust | nonparametric")
        ->check(CLI::IsMember({"robust", "nonrobust", "nonparametric"}))
        ->capture_default_str();
    app->add_option("--jbar", d.jbar, "Least favorable post-change J (robust)")->capture_default_str();
    app->add_option("--j1", d.j1, "Assumed post-change J (nonrobust)")->capture_default_str();
    app->add_option("--m0", d.m0, "Pre-change mean of V (nonparametric)")->capture_default_str();
    app->add_option("--m1", d.m1, "Post-change mean of V (nonparametric)")->capture_default_str();
    if (with_false_alarm) {
        auto* beta = app->add_option("--beta", d.beta, "Target mean time to false alarm; A = log(beta)");
        auto* threshold = app->add_option("--threshold", d.threshold, "CUSUM threshold A");
        beta->excludes(threshold);
        threshold->excludes(beta);
    }
}

void validate_geometry(const CommonOptions& c) {
    if (c.n < 5) throw InvalidArgument("--n must be >= 5");
    if (c.p < 2) throw InvalidArgument("--p must be >= 2");
}

DetectorSpec make_spec(const CommonOptions& c, const DetectorOptions& d, double threshold) {
    DetectorSpec spec;
    if (d.kind == "robust") {
        spec.rule = RobustRule{d.jbar};
    } else if (d.kind == "nonrobust") {
        spec.rule = NonRobustRule{d.j1};
    } else {
        spec.rule = NonParametricRule{d.m0, d.m1};
    }
    spec.threshold = threshold;
    spec.n = c.n;
    spec.p = c.p;
    spec.c_override = c.c_override;
    validate(spec);
    return spec;
}

double resolve_threshold(const DetectorOptions& d) {
    if (d.beta.has_value() == d.threshold.has_value())
        throw InvalidArgument("exactly one of --beta or --threshold is required");
    return d.threshold ? *d.threshold : threshold_from_beta(*d.beta);
}

template <typename Fn>
auto with_input(const std::string& path, Fn&& fn) {
    if (path == "-") return fn(std::cin);
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open input " + path);
    return fn(in);
}


// ---------------------------------------------------------------- detect

int detect_command(const CommonOptions& c, const DetectorOptions& d, const std::string& input,
                   const std::string& format, bool stop_on_alarm, std::ostream& out, std::ostream& err) {
    validate_geometry(c);
    const DetectorSpec spec = make_spec(c, d, resolve_threshold(d));
    const IngestResult data =
        with_input(input, [&](std::istream& in) { return ingest(in, parse_input_format(format), c.n, c.p); });
    for (const auto& w : data.warnings) err << "warning: " << w << '\n';

    Sink sink(c.out, out);
    *sink << json{{"schema", kDetectSchema}, {"detector", spec.id()}, {"A", spec.threshold}, {"n", c.n}, {"p", c.p}}.dump()
          << '\n';
    CusumDetector detector(spec);
    for (const Batch& batch : data.batches) {
        const double v = max_magnitude_correlation(batch);
        const CusumState& state = detector.update(v);
        *sink << json{{"m", state.m}, {"V", v}, {"W", state.W}, {"alarm", state.W >= spec.threshold}}.dump() << '\n';
        if (stop_on_alarm && state.alarmed) break;
    }
    const auto& final_state = detector.state();
    if (final_state.tau) {
        err << "alarm at batch " << *final_state.tau << '\n';
        return kExitAlarm;
    }
    return kExitOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
    std::string scenario = "paper-fig2";
    std::int64_t length = 2000;
    std::int64_t nu = 501;
    double J = 2.0;
    int sparsity = 5;
    int df = 0;
    std::string raw_csv;
};

ScenarioSchedule build_schedule(const SimulateOptions& s, const CommonOptions& c) {
    if (s.scenario == "paper-fig2") return ScenarioSchedule::paper_fig2();
    if (s.scenario == "null") return ScenarioSchedule::null(s.length);
    if (s.scenario == "null-vector") return ScenarioSchedule::null(s.length, PreChangeMode::kVector);
    if (s.scenario == "single-j") return ScenarioSchedule::single_j(s.nu, s.length, s.J);
    if (s.scenario == "wishart") {
        Rng rng = substream(c.seed, 0x57495348ULL, 0);
        ScenarioSchedule schedule;
        schedule.nu = s.nu;
        schedule.horizon = s.length;
        schedule.pre_change = PreChangeMode::kVector;
        schedule.segments = {{s.nu, s.length, masked_wishart_covariance(c.p, s.df > 0 ? s.df : c.p, s.sparsity, rng)}};
        return schedule;
    }
    throw InvalidArgument("unknown scenario '" + s.scenario + "'");
}

int simulate_command(const CommonOptions& c, const SimulateOptions& s, std::ostream& out) {
    validate_geometry(c);
    const ScenarioSchedule schedule = build_schedule(s, c);
    std::vector<Batch> raw;
    const ScenarioStream stream = scenario_stream(schedule, c.n, c.p, c.seed, s.raw_csv.empty() ? nullptr : &raw);

    Sink sink(c.out, out);
    json header{{"schema", kStreamSchema}, {"scenario", s.scenario}, {"mode", stream.mode}, {"n", c.n},
                {"p", c.p},         {"seed", c.seed},      {"horizon", schedule.horizon}};
    header["nu"] = schedule.nu ? json(*schedule.nu) : json(nullptr);
    *sink << header.dump() << '\n';
    for (const StreamSample& sample : stream.samples) {
        json record{{"m", sample.m}, {"V", sample.V}};
        record["segment_J"] = sample.segment_J ? json(*sample.segment_J) : json(nullptr);
        *sink << record.dump() << '\n';
    }
    if (!s.raw_csv.empty()) {
        std::ofstream raw_out(s.raw_csv);
        if (!raw_out) throw InvalidArgument("cannot open " + s.raw_csv);
        write_batches_csv(raw_out, raw);
    }
    return kExitOk;
}

// ---------------------------------------------------------------- fit

int fit_command(const CommonOptions& c, const std::string& input, const std::string& kind, const std::string& format,
                int bins, const std::string& hist_path, std::ostream& out, std::ostream& err) {
    validate_geometry(c);
    std::vector<double> values;
    if (kind == "v") {
        values = with_input(input, [](std::istream& in) { return read_v_stream(in); });
    } else {
        const IngestResult data =
            with_input(input, [&](std::istream& in) { return ingest(in, parse_input_format(format), c.n, c.p); });
        for (const auto& w : data.warnings) err << "warning: " << w << '\n';
        for (const Batch& b : data.batches) values.push_back(max_magnitude_correlation(b));
    }
    const FitReport report = histogram_fit(values, bins, c.n, c.p, c.c_override);

    Sink sink(c.out, out);
    *sink << json{{"schema", kFitSchema}, {"j_hat", report.j_hat},   {"ks", report.ks},
                  {"sample_count", report.sample_count}, {"n", report.n}, {"p", report.p}}
                 .dump()
          << '\n';
    if (!hist_path.empty()) {
        Sink hist(hist_path, out);
        *hist << "bin_lo,bin_hi,density,fitted_pdf\n";
        const MaxCorrModel fitted(c.n, c.p, report.j_hat, c.c_override);
        for (std::size_t b = 0; b < report.density.size(); ++b) {
            const double lo = report.bin_edges[b];
            const double hi = report.bin_edges[b + 1];
            const double mid = 0.5 * (lo + hi);
            *hist << format_double(lo) << ',' << format_double(hi) << ',' << format_double(report.density[b]) << ','
                  << format_double(mid > 0.0 ? pdf(mid, fitted) : 0.0) << '\n';
        }
    }
    return kExitOk;
}

// ---------------------------------------------------------------- bench

struct BenchOptions {
    std::string preset;
    std::optional<std::int64_t> trials;
    std::optional<std::int64_t> horizon;
    std::optional<double> post_J;
    std::vector<double> thresholds;
    int threads = 0;
};

int bench_command(const CommonOptions& c, const DetectorOptions& d, const BenchOptions& b, std::ostream& out) {
    validate_geometry(c);
    BenchPreset preset;
    if (!b.preset.empty()) {
        preset = bench_preset(b.preset, c.n, c.p);
    } else {
        if (b.thresholds.empty()) throw InvalidArgument("bench needs --preset or --thresholds");
        preset.name = "custom";
        preset.trials = 5000;
        preset.curves = {{make_spec(c, d, b.thresholds.front()), b.thresholds}};
    }
    OcOptions options;
    options.trials = b.trials.value_or(preset.trials);
    options.post_J = b.post_J.value_or(preset.post_J);
    options.horizon = b.horizon.value_or(preset.horizon);
    options.mc.seed = c.seed;
    options.mc.threads = b.threads;

    std::vector<OcPoint> rows;
    for (auto& [spec, thresholds] : preset.curves) {
        spec.c_override = c.c_override;
        const auto curve = oc_curve(std::span(&spec, 1), thresholds, options);
        rows.insert(rows.end(), curve.begin(), curve.end());
    }
    Sink sink(c.out, out);
    write_oc_csv(*sink, rows);
    return kExitOk;
}

// ---------------------------------------------------------------- density

int density_command(const CommonOptions& c, double J, int grid, std::ostream& out) {
    validate_geometry(c);
    if (grid < 1) throw InvalidArgument("--grid must be >= 1");
    const MaxCorrModel model(c.n, c.p, J, c.c_override);
    Sink sink(c.out, out);
    *sink << "v,pdf,cdf\n";
    for (int i = 1; i <= grid; ++i) {
        const double v = static_cast<double>(i) / grid;
        *sink << format_double(v) << ',' << format_double(pdf(v, model)) << ',' << format_double(cdf(v, model)) << '\n';
    }
    return kExitOk;
}

}  // namespace

BenchPreset bench_preset(const std::string& name, int n, int p) {
    const auto spec = [&](IncrementRule rule) {
        DetectorSpec s;
        s.rule = rule;
        s.threshold = 1.0;
        s.n = n;
        s.p = p;
        return s;
    };
    const std::vector<double> log_grid{2.0, 3.0, 4.0, 5.0, 6.0, 7.0};

    BenchPreset preset;
    preset.name = name;
    preset.horizon = 200'000;
    if (name == "fig6" || name == "fig6-desk") {
        preset.post_J = 2.0;
        preset.trials = name == "fig6" ? 5000 : 1000;
        preset.curves = {
            {spec(RobustRule{2.0}), log_grid},
            {spec(NonRobustRule{10.0}), log_grid},
            {spec(NonRobustRule{20.0}), log_grid},
            {spec(NonRobustRule{50.0}), log_grid},
        };
        return preset;
    }
    if (name == "fig7" || name == "fig7-desk") {
        preset.post_J = 3.62;
        preset.trials = name == "fig7" ? 5000 : 1000;
        preset.curves = {
            {spec(NonRobustRule{3.62}), log_grid},
            {spec(NonParametricRule{0.9117, 0.9467}), {0.1, 0.15, 0.2, 0.25, 0.3}},
        };
        return preset;
    }
    throw InvalidArgument("unknown bench preset '" + name + "'");
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Correlation-change detection for high-dimensional streams", "maxcorr"};
    app.require_subcommand(1);

    CommonOptions common;
    DetectorOptions detector;

    auto* detect = app.add_subcommand("detect", "Run a CUSUM detector over a data file");
    add_common(detect, common);
    add_detector(detect, detector, true);
    std::string input = "-";
    std::string format = "csv";
    bool stop_on_alarm = false;
    detect->add_option("--input", input, "Input file, '-' for stdin")->capture_default_str();
    detect->add_option("--format", format, "csv | ndjson")->capture_default_str();
    detect->add_flag("--stop-on-alarm", stop_on_alarm, "Stop reading at the first alarm");

    auto* simulate = app.add_subcommand("simulate", "Generate a V stream for a change-point scenario");
    add_common(simulate, common);
    SimulateOptions sim;
    simulate->add_option("--scenario", sim.scenario, "paper-fig2 | null | null-vector | single-j | wishart")
        ->capture_default_str();
    simulate->add_option("--length", sim.length, "Stream length in batches")->capture_default_str();
    simulate->add_option("--nu", sim.nu, "First post-change batch (1-based)")->capture_default_str();
    simulate->add_option("--J", sim.J, "Post-change J (single-j)")->capture_default_str();
    simulate->add_option("--sparsity", sim.sparsity, "Row sparsity s of the Wishart mask")->capture_default_str();
    simulate->add_option("--df", sim.df, "Wishart degrees of freedom (default p)");
    simulate->add_option("--raw-csv", sim.raw_csv, "Also write vector-level batches as CSV");

    auto* fit = app.add_subcommand("fit", "Fit J to V samples and report goodness of fit");
    add_common(fit, common);
    std::string fit_input = "-";
    std::string fit_kind = "v";
    std::string fit_format = "csv";
    std::string hist_path;
    int bins = 50;
    fit->add_option("--input", fit_input, "Input file, '-' for stdin")->capture_default_str();
    fit->add_option("--input-kind", fit_kind, "v (V-stream NDJSON) | raw (observations)")
        ->check(CLI::IsMember({"v", "raw"}))
        ->capture_default_str();
    fit->add_option("--format", fit_format, "Raw observation format: csv | ndjson")->capture_default_str();
    fit->add_option("--bins", bins, "Histogram bins")->capture_default_str();
    fit->add_option("--hist", hist_path, "Histogram CSV output path");

    auto* bench = app.add_subcommand("bench", "Monte Carlo WADD / MFA operating characteristics");
    add_common(bench, common);
    add_detector(bench, detector, false);
    BenchOptions bopt;
    bench->add_option("--preset", bopt.preset, "fig6 | fig6-desk | fig7 | fig7-desk");
    bench->add_option("--trials", bopt.trials, "Monte Carlo trials per point");
    bench->add_option("--horizon", bopt.horizon, "MFA horizon (default 20*exp(A))");
    bench->add_option("--post-j", bopt.post_J, "Post-change J for delay runs");
    bench->add_option("--thresholds", bopt.thresholds, "Threshold grid for a custom detector")->delimiter(',');
    bench->add_option("--threads", bopt.threads, "Worker threads (0 = all cores)")->capture_default_str();

    auto* density = app.add_subcommand("density", "Tabulate the asymptotic density and CDF of V");
    add_common(density, common);
    double J = 1.0;
    int grid = 512;
    density->add_option("--J", J, "Model parameter J")->capture_default_str();
    density->add_option("--grid", grid, "Number of grid points in (0, 1]")->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }

    try {
        if (*detect) return detect_command(common, detector, input, format, stop_on_alarm, out, err);
        if (*simulate) return simulate_command(common, sim, out);
        if (*fit) return fit_command(common, fit_input, fit_kind, fit_format, bins, hist_path, out, err);
        if (*bench) return bench_command(common, detector, bopt, out);
        if (*density) return density_command(common, J, grid, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}

}  // namespace maxcorr
