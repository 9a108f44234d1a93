// texive command-line front end.
//
// Exit codes: 0 success, 2 validation error (bad input, bad flags), 3 model error.

#include "texive/texive.hpp"

#include <filesystem>
#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

using namespace texive;
using json = nlohmann::ordered_json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::MalformedRecord, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& path, const std::string& data) {
    if (path.empty() || path == "-") {
        std::cout << data;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::MalformedRecord, "cannot write '" + path + "'");
    out << data;
}

TraceFormat parse_format(const std::string& s) { return s == "jsonl" ? TraceFormat::Jsonl : TraceFormat::Csv; }

json rate_json(const std::optional<double>& r) { return r ? json(*r) : json("n/a"); }

std::string fixed(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

struct Common {
    std::string trace, model, scenario, format = "csv", report = "text", region = "left-hand-drive", out;
    std::uint64_t seed = 1;
    double window_s = 4.5;
    double step_s = 0.5;
};

PipelineConfig pipeline_config(const Common& c, const ModelBundle& b) {
    PipelineConfig cfg;
    cfg.window_ms = std::llround(c.window_s * 1000.0);
    cfg.step_ms = std::llround(c.step_s * 1000.0);
    cfg.dct_k = b.dct_k;
    if (cfg.window_ms != b.window_ms)
        throw Error(Errc::DimensionMismatch, "model was trained with a " + std::to_string(b.window_ms) + " ms window");
    const auto region = parse_region(c.region);
    if (!region) throw Error(Errc::InvalidParams, "region must be left-hand-drive or right-hand-drive");
    cfg.region = *region;
    return cfg;
}

Models models_from(const ModelBundle& b) {
    if (!b.activity || !b.side) throw Error(Errc::ModelNotTrained, "model file needs activity and side sections");
    return {*b.activity, *b.side};
}

ModelBundle load_or_train(const Common& c) {
    if (!c.model.empty()) return parse_bundle(read_file(c.model));
    TrainingConfig tc;
    tc.window_ms = std::llround(c.window_s * 1000.0);
    auto m = train_models_on_corpus(c.seed, tc);
    ModelBundle b;
    b.activity = std::move(m.activity);
    b.side = std::move(m.side);
    b.window_ms = tc.window_ms;
    b.dct_k = tc.dct_k;
    return b;
}

json events_json(const std::vector<DetectionEvent>& events) {
    json arr = json::array();
    for (const auto& e : events) arr.push_back({{"t_ms", e.t_ms}, {"kind", e.kind}, {"detail", e.detail}});
    return arr;
}

// ---------------------------------------------------------------------------

int cmd_ingest(const Common& c, double resample_hz, const std::string& out_format) {
    const Trace t = parse_trace(read_file(c.trace), parse_format(c.format));
    const Trace r = resample_hz > 0 ? resample(t, resample_hz) : t;
    if (!c.out.empty()) {
        // Without --out-format, a .csv or .jsonl extension on --out decides.
        std::string fmt = out_format;
        if (fmt.empty()) {
            const auto ext = std::filesystem::path(c.out).extension().string();
            fmt = ext == ".csv" ? "csv" : ext == ".jsonl" ? "jsonl" : c.format;
        }
        write_output(c.out, serialize_trace(r, parse_format(fmt)));
    }
    const auto dur = r.samples.back().t_ms - r.samples.front().t_ms;
    if (c.report == "json") {
        json labels = json::array();
        for (const auto& l : r.labels)
            labels.push_back({{"start_ms", l.start_ms}, {"end_ms", l.end_ms}, {"name", label_name(l.label)}});
        json j{{"samples", r.samples.size()}, {"duration_ms", dur}, {"nominal_rate_hz", r.nominal_rate_hz}, {"labels", labels}};
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "samples " << r.samples.size() << "\nduration_ms " << dur << "\nlabels " << r.labels.size() << "\n";
        for (const auto& l : r.labels) std::cout << "  " << l.start_ms << ".." << l.end_ms << " " << label_name(l.label) << "\n";
    }
    return 0;
}

int cmd_train(const Common& c, const std::vector<std::string>& traces) {
    TrainingConfig tc;
    tc.window_ms = std::llround(c.window_s * 1000.0);
    tc.step_ms = std::llround(c.step_s * 1000.0);
    ModelBundle b;
    b.window_ms = tc.window_ms;
    b.dct_k = tc.dct_k;
    std::vector<std::vector<ActivityLabel>> sequences;
    if (traces.empty()) {
        b.activity = train_activity_on_corpus(c.seed, tc);
        for (const auto& d : corpus::e2e_corpus(c.seed)) {
            std::vector<ActivityLabel> seq;
            for (const auto& s : d.scenario.segments) seq.push_back(segment_label(s.kind));
            sequences.push_back(std::move(seq));
        }
    } else {
        const auto window = window_sample_count(tc.window_ms, kDefaultRateHz);
        const auto step = static_cast<std::size_t>(std::max<std::int64_t>(1, tc.step_ms / 50));
        std::vector<std::pair<FeatureVector, ActivityLabel>> ex;
        for (const auto& path : traces) {
            const Trace t = resample(parse_trace(read_file(path), parse_format(c.format)), kDefaultRateHz);
            auto e = activity_examples(t, window, step, tc.dct_k);
            ex.insert(ex.end(), e.begin(), e.end());
            std::vector<ActivityLabel> seq;
            for (const auto& l : t.labels) seq.push_back(l.label);
            sequences.push_back(std::move(seq));
        }
        b.activity = train_activity(ex);
    }
    b.side = train_side_on_corpus(c.seed, tc);
    b.transitions = fit_transitions(sequences);
    if (c.model.empty()) throw Error(Errc::InvalidParams, "--model output path required");
    write_output(c.model, serialize_bundle(b));
    std::cout << "activity classes " << b.activity->classes().size() << ", side classes " << b.side->classes().size()
              << ", written to " << c.model << "\n";
    return 0;
}

int cmd_detect(const Common& c, const std::string& keys_path) {
    const ModelBundle b = parse_bundle(read_file(c.model));
    const Models m = models_from(b);
    const PipelineConfig cfg = pipeline_config(c, b);
    const Trace t = resample(parse_trace(read_file(c.trace), parse_format(c.format)), cfg.rate_hz);
    std::optional<KeystrokeLog> keys;
    if (!keys_path.empty()) keys = parse_keystrokes(read_file(keys_path));
    const auto r = run_pipeline(t, m, cfg, keys ? &*keys : nullptr);
    if (c.report == "json") {
        json j{{"role", role_name(r.verdict.role)},
               {"distracted", r.verdict.distracted},
               {"confidence", r.verdict.confidence},
               {"latency_ms", r.verdict.latency_ms},
               {"peak_buffered_samples", r.peak_buffered_samples},
               {"events", events_json(r.events)}};
        std::cout << j.dump(2) << "\n";
    } else {
        for (const auto& e : r.events) std::cout << e.t_ms << "\t" << e.kind << (e.detail.empty() ? "" : "\t") << e.detail << "\n";
        std::cout << "role " << role_name(r.verdict.role) << "\nconfidence " << fixed(r.verdict.confidence)
                  << "\ndistracted " << (r.verdict.distracted ? "yes" : "no") << "\n";
    }
    return 0;
}

Scenario preset(const std::string& name, std::uint64_t seed) {
    if (name == "walk") {
        Scenario sc;
        sc.seed = seed;
        sc.segments = {{SegmentKind::Idle, 2.0, {}}, {SegmentKind::Walk, 30.0, {}}};
        return sc;
    }
    const Side side = name.find("right") != std::string::npos ? Side::Right : Side::Left;
    const Seat seat = name.find("back") != std::string::npos ? Seat::Back : Seat::Front;
    if (name.rfind("drive-", 0) != 0) throw Error(Errc::InvalidScenario, "unknown preset '" + name + "'");
    return corpus::drive_scenario(side, seat, seed).scenario;
}

int cmd_simulate(const Common& c, const std::string& preset_name, const std::string& keys_out,
                 const std::string& texting_class, std::size_t letters) {
    Scenario sc = c.scenario.empty() ? preset(preset_name, c.seed) : parse_scenario(read_file(c.scenario));
    if (!c.scenario.empty()) sc.seed = c.seed;
    const auto g = generate(sc);
    write_output(c.out, serialize_trace(g.trace, parse_format(c.format)));
    if (!keys_out.empty()) {
        const auto cls = texting_class == "distracted" ? TextingClass::Distracted : TextingClass::Normal;
        const auto start = g.trace.samples.size() > 200 ? g.trace.samples[g.trace.samples.size() - 200].t_ms : 0;
        write_output(keys_out, serialize_keystrokes(generate_keystrokes(cls, letters, c.seed, start)));
    }
    return 0;
}

int cmd_evaluate(const Common& c, bool table1) {
    if (table1) {
        const auto r = metrics_from_counts(38, 46, 250, 3);
        const std::string note =
            "a printed accuracy of 84.46% accompanies these counts; the count arithmetic (38+250)/337 gives 85.46%";
        if (c.report == "json") {
            json j{{"tp", r.tp}, {"fp", r.fp}, {"tn", r.tn}, {"fn", r.fn},
                   {"precision", rate_json(r.precision)}, {"sensitivity", rate_json(r.sensitivity)},
                   {"specificity", rate_json(r.specificity)}, {"accuracy", rate_json(r.accuracy)},
                   {"latency_ms", "n/a"}, {"note", note}};
            std::cout << j.dump(2) << "\n";
        } else {
            std::cout << "tp " << r.tp << "  fp " << r.fp << "  tn " << r.tn << "  fn " << r.fn << "\n"
                      << "precision   " << format_rate(r.precision) << "\n"
                      << "sensitivity " << format_rate(r.sensitivity) << "\n"
                      << "specificity " << format_rate(r.specificity) << "\n"
                      << "accuracy    " << format_rate(r.accuracy) << " [1]\n"
                      << "[1] " << note << "\n";
        }
        return 0;
    }
    const ModelBundle b = load_or_train(c);
    const Models m = models_from(b);
    const PipelineConfig cfg = pipeline_config(c, b);
    std::vector<bool> pred, truth;
    std::int64_t max_latency = 0;
    double sum_latency = 0;
    std::size_t n_latency = 0;
    json rows = json::array();
    for (const auto& d : corpus::e2e_corpus(c.seed)) {
        const auto g = generate(d.scenario);
        const auto r = run_pipeline(g.trace, m, cfg);
        const auto entry = corpus::entry_event(g);
        const Role want = cfg.region == Region::LeftHandDrive
                              ? d.truth
                              : (d.side == Side::Right && d.seat == Seat::Front ? Role::Driver : Role::Passenger);
        pred.push_back(r.verdict.role == Role::Driver);
        truth.push_back(want == Role::Driver);
        std::int64_t lat = -1;
        if (r.first_verdict_t_ms) {
            lat = *r.first_verdict_t_ms - entry.end_ms;
            max_latency = std::max(max_latency, lat);
            sum_latency += static_cast<double>(lat);
            ++n_latency;
        }
        rows.push_back({{"seed", d.scenario.seed}, {"side", side_name(d.side)}, {"seat", seat_name(d.seat)},
                        {"truth", role_name(want)}, {"predicted", role_name(r.verdict.role)}, {"latency_ms", lat}});
    }
    const auto r = compute_metrics(pred, truth);
    const double mean_latency = n_latency ? sum_latency / static_cast<double>(n_latency) : 0.0;
    if (c.report == "json") {
        json j{{"tp", r.tp}, {"fp", r.fp}, {"tn", r.tn}, {"fn", r.fn},
               {"precision", rate_json(r.precision)}, {"sensitivity", rate_json(r.sensitivity)},
               {"specificity", rate_json(r.specificity)}, {"accuracy", rate_json(r.accuracy)},
               {"latency_ms", n_latency ? json(mean_latency) : json("n/a")}, {"max_latency_ms", max_latency},
               {"scenarios", rows}};
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "scenarios   " << pred.size() << "\n"
                  << "tp " << r.tp << "  fp " << r.fp << "  tn " << r.tn << "  fn " << r.fn << "\n"
                  << "precision   " << format_rate(r.precision) << "\n"
                  << "sensitivity " << format_rate(r.sensitivity) << "\n"
                  << "specificity " << format_rate(r.specificity) << "\n"
                  << "accuracy    " << format_rate(r.accuracy) << "\n"
                  << "latency_ms  mean " << fixed(mean_latency, 1) << ", max " << max_latency << "\n";
    }
    return 0;
}

int cmd_schedule(const Common& c, double mean_s, double sigma_s, double lambda, double w, double s, std::size_t trials) {
    const auto plan = plan_entry_sampling(mean_s, sigma_s);
    BumpModel bm{lambda, w, s, 1.0};
    const double p = detection_cycle_prob(bm);
    const auto sim = simulate_duty_cycle(bm, trials, c.seed);
    if (c.report == "json") {
        json j{{"intervals_s", plan},
               {"lambda", lambda},
               {"w", w},
               {"s", s},
               {"detection_cycle_prob", p},
               {"expected_cost_i1_tw", expected_cost(bm, 1, w)},
               {"simulated_first_cycle_hit_rate", sim.first_cycle_hit_rate},
               {"simulated_mean_cycles", sim.mean_cycles_to_detect},
               {"simulated_mean_energy", sim.mean_energy}};
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "entry sampling intervals (s):";
        for (double t : plan) std::cout << " " << detail::format_double(t);
        std::cout << "\nlambda " << fixed(lambda, 6) << "  w " << w << "  s " << s << "\n"
                  << "detection_cycle_prob (formula)      " << fixed(p, 6) << "\n"
                  << "expected_cost(i=1, t=w)             " << fixed(expected_cost(bm, 1, w), 4) << "\n"
                  << "first-cycle hit rate (simulation)   " << fixed(sim.first_cycle_hit_rate, 6) << "\n"
                  << "mean cycles to detect (simulation)  " << fixed(sim.mean_cycles_to_detect, 4) << "\n"
                  << "mean on-time energy (simulation)    " << fixed(sim.mean_energy, 4) << "\n";
    }
    return 0;
}

int cmd_texting(const Common& c, const std::string& keys_path, const std::string& generate_class, std::size_t letters) {
    KeystrokeLog log;
    if (!keys_path.empty()) log = parse_keystrokes(read_file(keys_path));
    else
        log = generate_keystrokes(generate_class == "distracted" ? TextingClass::Distracted : TextingClass::Normal,
                                  letters, c.seed);
    const auto st = compute_stats(log);
    const auto v = classify_texting(st);
    if (c.report == "json") {
        json j{{"mean_interval_ms", st.mean_interval_ms},
               {"sd_interval_ms", st.sd_interval_ms},
               {"frac_under_800ms", st.frac_under_800ms},
               {"inputs_per_typo", std::isinf(st.inputs_per_typo) ? json("inf") : json(st.inputs_per_typo)},
               {"verdict", texting_name(v.verdict)},
               {"confidence", v.confidence}};
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "mean_interval_ms " << fixed(st.mean_interval_ms, 2) << "\nsd_interval_ms " << fixed(st.sd_interval_ms, 2)
                  << "\nfrac_under_800ms " << fixed(st.frac_under_800ms, 4) << "\ninputs_per_typo "
                  << (std::isinf(st.inputs_per_typo) ? std::string("inf") : fixed(st.inputs_per_typo, 2)) << "\nverdict "
                  << texting_name(v.verdict) << "\nconfidence " << fixed(v.confidence, 4) << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"texive: driver/passenger detection from phone inertial traces"};
    app.require_subcommand(1);
    Common c;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", c.seed, "random seed");
        sub->add_option("--format", c.format, "trace format")->check(CLI::IsMember({"csv", "jsonl"}));
        sub->add_option("--report", c.report, "report format")->check(CLI::IsMember({"text", "json"}));
        sub->add_option("--window-s", c.window_s, "feature window (s)")->check(CLI::PositiveNumber);
        sub->add_option("--step-s", c.step_s, "window step (s)")->check(CLI::PositiveNumber);
        sub->add_option("--region", c.region, "left-hand-drive or right-hand-drive")
            ->check(CLI::IsMember({"left-hand-drive", "right-hand-drive"}));
    };

    auto* ingest = app.add_subcommand("ingest", "parse, validate and optionally resample/convert a trace");
    double resample_hz = 0;
    std::string out_format;
    add_common(ingest);
    ingest->add_option("--trace", c.trace, "input trace")->required();
    ingest->add_option("--resample-hz", resample_hz, "resample to this rate");
    ingest->add_option("--out", c.out, "write the (resampled) trace here");
    ingest->add_option("--out-format", out_format, "format of --out")->check(CLI::IsMember({"csv", "jsonl"}));

    auto* train = app.add_subcommand("train", "train activity and side models");
    std::vector<std::string> train_traces;
    add_common(train);
    train->add_option("--trace", train_traces, "labeled trace(s); synthetic corpus when omitted");
    train->add_option("--model", c.model, "output model file")->required();

    auto* detect = app.add_subcommand("detect", "run the streaming pipeline on a trace");
    std::string keys_path;
    add_common(detect);
    detect->add_option("--trace", c.trace, "input trace")->required();
    detect->add_option("--model", c.model, "model file")->required();
    detect->add_option("--keys", keys_path, "keystroke log");

    auto* simulate = app.add_subcommand("simulate", "generate a synthetic trace");
    std::string preset_name = "drive-left-front", keys_out, texting_class = "normal";
    std::size_t letters = 200;
    add_common(simulate);
    simulate->add_option("--scenario", c.scenario, "scenario file");
    simulate->add_option("--preset", preset_name, "walk, drive-left-front, drive-right-front, drive-left-back, drive-right-back");
    simulate->add_option("--out", c.out, "output trace (stdout when omitted)");
    simulate->add_option("--keys-out", keys_out, "also write a keystroke log");
    simulate->add_option("--texting", texting_class, "keystroke class")->check(CLI::IsMember({"normal", "distracted"}));
    simulate->add_option("--letters", letters, "keystroke letters");

    auto* evaluate = app.add_subcommand("evaluate", "evaluate on the synthetic driver/passenger corpus");
    bool table1 = false;
    add_common(evaluate);
    evaluate->add_option("--model", c.model, "model file (trained from --seed when omitted)");
    evaluate->add_flag("--table1", table1, "metrics for the published activity-recognition counts");

    auto* schedule = app.add_subcommand("schedule", "sampling plan and duty-cycle numbers");
    double mean_s = 100, sigma_s = 20, lambda = kDefaultBumpRate, w = 10, s = 50;
    std::size_t trials = 20000;
    add_common(schedule);
    schedule->add_option("--mean-s", mean_s, "mean inter-entry time T (s)");
    schedule->add_option("--sigma-s", sigma_s, "its standard deviation (s)");
    schedule->add_option("--lambda", lambda, "bump rate (1/s)");
    schedule->add_option("--w", w, "detector on-time (s)");
    schedule->add_option("--s", s, "detector sleep (s)");
    schedule->add_option("--trials", trials, "Monte-Carlo trials");

    auto* texting = app.add_subcommand("texting", "classify a keystroke log");
    std::string gen_class = "normal";
    add_common(texting);
    texting->add_option("--keys", keys_path, "keystroke log (generated from --seed when omitted)");
    texting->add_option("--generate", gen_class, "class to generate")->check(CLI::IsMember({"normal", "distracted"}));
    texting->add_option("--letters", letters, "letters to generate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*ingest) return cmd_ingest(c, resample_hz, out_format);
        if (*train) return cmd_train(c, train_traces);
        if (*detect) return cmd_detect(c, keys_path);
        if (*simulate) return cmd_simulate(c, preset_name, keys_out, texting_class, letters);
        if (*evaluate) return cmd_evaluate(c, table1);
        if (*schedule) return cmd_schedule(c, mean_s, sigma_s, lambda, w, s, trials);
        if (*texting) return cmd_texting(c, keys_path, gen_class, letters);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_model_error(e.code()) ? 3 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
