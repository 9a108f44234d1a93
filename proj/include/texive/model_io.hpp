#pragma once

// Versioned text container for trained models, transition tables and scenarios.
//
//   texive-model/1
//   activity {
//     dim 43
//     variance_floor 1e-06
//     class Walking {
//       count 12
//       prior 0.25
//       mean ...
//       m2 ...
//     }
//   }
//
// Each line is either `key value...`, `name [arg] {` opening a block, or `}`.
// Doubles are written in shortest round-trip form, so equal models produce
// identical bytes and parsing restores them exactly.

#include "activity.hpp"
#include "error.hpp"
#include "localize.hpp"
#include "scheduler.hpp"
#include "simulator.hpp"
#include "trace_io.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace texive {

inline constexpr std::string_view kModelVersionTag = "texive-model/1";

namespace model_text {

struct Node {
    std::string name;
    std::string arg;
    std::vector<std::pair<std::string, std::vector<std::string>>> entries;
    std::vector<Node> children;
    std::size_t line = 0;

    const Node* child(std::string_view n) const {
        for (const auto& c : children)
            if (c.name == n) return &c;
        return nullptr;
    }

    const std::vector<std::string>& values(std::string_view key) const {
        for (const auto& [k, v] : entries)
            if (k == key) return v;
        throw Error(Errc::MalformedRecord, "block '" + name + "' (line " + std::to_string(line) + ") lacks key '" +
                                               std::string(key) + "'");
    }

    const std::string& value(std::string_view key) const {
        const auto& v = values(key);
        if (v.size() != 1)
            throw Error(Errc::MalformedRecord, "key '" + std::string(key) + "' in block '" + name + "' needs one value");
        return v.front();
    }

    bool has(std::string_view key) const {
        for (const auto& e : entries)
            if (e.first == key) return true;
        return false;
    }
};

inline std::vector<std::string_view> words(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        const std::size_t b = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > b) out.push_back(line.substr(b, i - b));
    }
    return out;
}

inline Node parse_document(std::string_view text) {
    const auto lines = detail::lines_of(text);
    std::size_t i = 0;
    while (i < lines.size() && detail::trim(lines[i]).empty()) ++i;
    if (i == lines.size()) throw Error(Errc::MalformedRecord, "empty model file");
    const auto tag = detail::trim(lines[i]);
    if (tag != kModelVersionTag) {
        if (tag.starts_with("texive-model/"))
            throw Error(Errc::SchemaVersionMismatch, "unsupported version tag '" + std::string(tag) + "'");
        throw Error(Errc::MalformedRecord, "missing version tag");
    }
    Node root;
    root.name = "root";
    std::vector<Node*> stack{&root};
    for (++i; i < lines.size(); ++i) {
        const auto lineno = i + 1;
        const auto w = words(lines[i]);
        if (w.empty() || w.front().starts_with('#')) continue;
        if (w.size() == 1 && w[0] == "}") {
            if (stack.size() == 1) throw Error(Errc::MalformedRecord, detail::line_msg(lineno, "unbalanced '}'"));
            stack.pop_back();
            continue;
        }
        if (w.back() == "{") {
            if (w.size() < 2 || w.size() > 3) throw Error(Errc::MalformedRecord, detail::line_msg(lineno, "bad block header"));
            Node n;
            n.name = std::string(w[0]);
            if (w.size() == 3) n.arg = std::string(w[1]);
            n.line = lineno;
            stack.back()->children.push_back(std::move(n));
            stack.push_back(&stack.back()->children.back());
            continue;
        }
        std::vector<std::string> vals;
        for (std::size_t k = 1; k < w.size(); ++k) vals.emplace_back(w[k]);
        stack.back()->entries.emplace_back(std::string(w[0]), std::move(vals));
    }
    if (stack.size() != 1) throw Error(Errc::MalformedRecord, "unterminated block '" + stack.back()->name + "'");
    return root;
}

inline double to_double(const std::string& s) { return detail::parse_real(s, 0); }

inline std::size_t to_size(const std::string& s) {
    const auto v = detail::parse_int(s, 0);
    if (v < 0) throw Error(Errc::MalformedRecord, "negative count '" + s + "'");
    return static_cast<std::size_t>(v);
}

inline std::vector<double> to_doubles(const std::vector<std::string>& v) {
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& s : v) out.push_back(to_double(s));
    return out;
}

class Writer {
public:
    Writer() { out_ += kModelVersionTag; out_ += '\n'; }

    void open(std::string_view name, std::string_view arg = {}) {
        indent();
        out_ += name;
        if (!arg.empty()) {
            out_ += ' ';
            out_ += arg;
        }
        out_ += " {\n";
        ++depth_;
    }
    void close() {
        --depth_;
        indent();
        out_ += "}\n";
    }
    void kv(std::string_view key, std::string_view value) {
        indent();
        out_ += key;
        out_ += ' ';
        out_ += value;
        out_ += '\n';
    }
    void kv(std::string_view key, double v) { kv(key, detail::format_double(v)); }
    void kv_size(std::string_view key, std::size_t v) { kv(key, std::to_string(v)); }
    void kv(std::string_view key, std::span<const double> vs) {
        indent();
        out_ += key;
        for (double v : vs) {
            out_ += ' ';
            out_ += detail::format_double(v);
        }
        out_ += '\n';
    }
    std::string str() && { return std::move(out_); }

private:
    void indent() { out_.append(static_cast<std::size_t>(depth_) * 2, ' '); }
    std::string out_;
    int depth_ = 0;
};

template <typename Label>
void write_nb(Writer& w, std::string_view section, const GaussianNaiveBayes<Label>& m) {
    w.open(section);
    w.kv_size("dim", m.dim());
    w.kv("variance_floor", m.variance_floor());
    for (const auto& c : m.classes()) {
        w.open("class", LabelTraits<Label>::name(c.label));
        w.kv_size("count", c.count);
        w.kv("prior", c.prior);
        w.kv("mean", c.mean);
        w.kv("m2", c.m2);
        w.close();
    }
    w.close();
}

template <typename Label>
GaussianNaiveBayes<Label> read_nb(const Node& n) {
    const std::size_t dim = to_size(n.value("dim"));
    const double floor = to_double(n.value("variance_floor"));
    std::vector<ClassStats<Label>> classes;
    for (const auto& c : n.children) {
        if (c.name != "class") continue;
        const auto label = LabelTraits<Label>::parse(c.arg);
        if (!label) throw Error(Errc::MalformedRecord, "unknown class label '" + c.arg + "'");
        ClassStats<Label> s;
        s.label = *label;
        s.count = to_size(c.value("count"));
        s.prior = to_double(c.value("prior"));
        s.mean = to_doubles(c.values("mean"));
        s.m2 = to_doubles(c.values("m2"));
        if (s.mean.size() != dim || s.m2.size() != dim)
            throw Error(Errc::DimensionMismatch, "class '" + c.arg + "' vectors do not match dim " + std::to_string(dim));
        if (s.count == 0) throw Error(Errc::MalformedRecord, "class '" + c.arg + "' has zero count");
        classes.push_back(std::move(s));
    }
    if (classes.size() < 2) throw Error(Errc::InsufficientExamples, "model block has fewer than 2 classes");
    return GaussianNaiveBayes<Label>::from_parts(dim, floor, std::move(classes));
}

} // namespace model_text

// Everything a model file can carry; absent sections stay empty.
struct ModelBundle {
    std::optional<ActivityModel> activity;
    std::optional<SideModel> side;
    std::optional<TransitionModel> transitions;
    std::optional<Scenario> scenario;
    std::int64_t window_ms = kDefaultWindowMs;
    std::size_t dct_k = kDefaultDctCoefficients;

    bool operator==(const ModelBundle&) const = default;
};

inline std::string serialize_bundle(const ModelBundle& b) {
    using namespace model_text;
    Writer w;
    w.open("features");
    w.kv("window_ms", std::to_string(b.window_ms));
    w.kv_size("dct_k", b.dct_k);
    w.close();
    if (b.activity) write_nb(w, "activity", *b.activity);
    if (b.side) write_nb(w, "side", *b.side);
    if (b.transitions) {
        const auto& t = *b.transitions;
        w.open("transitions");
        std::string names;
        for (auto s : t.states) {
            if (!names.empty()) names += ' ';
            names += label_name(s);
        }
        w.kv("states", names);
        w.kv("initial", t.initial);
        for (const auto& row : t.T) w.kv("row", row);
        w.close();
    }
    if (b.scenario) {
        const auto& sc = *b.scenario;
        w.open("scenario");
        w.kv("seed", std::to_string(sc.seed));
        w.kv("pocket", pocket_name(sc.pocket));
        const double noise[3] = {sc.noise.accel, sc.noise.gyro, sc.noise.mag};
        w.kv("noise", noise);
        w.kv("heading_deg", sc.heading_deg);
        w.kv("standing_pitch_deg", sc.standing_pitch_deg);
        w.kv("sitting_pitch_deg", sc.sitting_pitch_deg);
        for (const auto& s : sc.segments) {
            w.open("segment", segment_kind_name(s.kind));
            w.kv("duration_s", s.duration_s);
            w.kv("intensity", s.params.intensity);
            w.kv("bump_rate", s.params.bump_rate);
            w.kv("seat", seat_name(s.params.seat));
            w.kv("spike_ut", s.params.spike_ut);
            w.close();
        }
        w.close();
    }
    return std::move(w).str();
}

inline Scenario parse_scenario_node(const model_text::Node& n) {
    using namespace model_text;
    Scenario sc;
    if (n.has("seed")) {
        const auto& s = n.value("seed");
        std::uint64_t v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) throw Error(Errc::MalformedRecord, "bad seed '" + s + "'");
        sc.seed = v;
    }
    if (n.has("pocket")) {
        const auto& p = n.value("pocket");
        if (p == pocket_name(Pocket::LeftPocket)) sc.pocket = Pocket::LeftPocket;
        else if (p == pocket_name(Pocket::RightPocket)) sc.pocket = Pocket::RightPocket;
        else throw Error(Errc::InvalidScenario, "pocket must be LeftPocket or RightPocket");
    }
    if (n.has("noise")) {
        const auto v = to_doubles(n.values("noise"));
        if (v.size() != 3) throw Error(Errc::MalformedRecord, "noise needs accel gyro mag");
        sc.noise = {v[0], v[1], v[2]};
    }
    if (n.has("heading_deg")) sc.heading_deg = to_double(n.value("heading_deg"));
    if (n.has("standing_pitch_deg")) sc.standing_pitch_deg = to_double(n.value("standing_pitch_deg"));
    if (n.has("sitting_pitch_deg")) sc.sitting_pitch_deg = to_double(n.value("sitting_pitch_deg"));
    for (const auto& c : n.children) {
        if (c.name != "segment") continue;
        const auto kind = parse_segment_kind(c.arg);
        if (!kind) throw Error(Errc::InvalidScenario, "unknown segment kind '" + c.arg + "'");
        Segment s;
        s.kind = *kind;
        s.duration_s = to_double(c.value("duration_s"));
        if (c.has("intensity")) s.params.intensity = to_double(c.value("intensity"));
        if (c.has("bump_rate")) s.params.bump_rate = to_double(c.value("bump_rate"));
        if (c.has("spike_ut")) s.params.spike_ut = to_double(c.value("spike_ut"));
        if (c.has("seat")) {
            const auto& seat = c.value("seat");
            if (seat == "Front") s.params.seat = Seat::Front;
            else if (seat == "Back") s.params.seat = Seat::Back;
            else throw Error(Errc::InvalidScenario, "seat must be Front or Back");
        }
        sc.segments.push_back(s);
    }
    validate_scenario(sc);
    return sc;
}

inline ModelBundle parse_bundle(std::string_view text) {
    using namespace model_text;
    const Node root = parse_document(text);
    ModelBundle b;
    if (const auto* f = root.child("features")) {
        b.window_ms = detail::parse_int(f->value("window_ms"), f->line);
        b.dct_k = to_size(f->value("dct_k"));
    }
    if (const auto* n = root.child("activity")) b.activity = read_nb<ActivityLabel>(*n);
    if (const auto* n = root.child("side")) b.side = read_nb<EntryCase>(*n);
    if (const auto* n = root.child("transitions")) {
        TransitionModel t;
        for (const auto& s : n->values("states")) {
            const auto l = parse_activity_label(s);
            if (!l) throw Error(Errc::MalformedRecord, "unknown state '" + s + "'");
            t.states.push_back(*l);
        }
        t.initial = to_doubles(n->values("initial"));
        for (const auto& [k, v] : n->entries)
            if (k == "row") t.T.push_back(to_doubles(v));
        if (t.initial.size() != t.states.size() || t.T.size() != t.states.size())
            throw Error(Errc::DimensionMismatch, "transition table does not match its state list");
        for (const auto& row : t.T)
            if (row.size() != t.states.size()) throw Error(Errc::DimensionMismatch, "transition row length");
        b.transitions = std::move(t);
    }
    if (const auto* n = root.child("scenario")) b.scenario = parse_scenario_node(*n);
    return b;
}

// Activity-model-only convenience wrappers.
inline std::string serialize_model(const ActivityModel& m) {
    ModelBundle b;
    b.activity = m;
    return serialize_bundle(b);
}

inline ActivityModel parse_model(std::string_view text) {
    auto b = parse_bundle(text);
    if (!b.activity) throw Error(Errc::ModelNotTrained, "file has no activity section");
    return std::move(*b.activity);
}

inline std::string serialize_scenario(const Scenario& sc) {
    ModelBundle b;
    b.scenario = sc;
    return serialize_bundle(b);
}

inline Scenario parse_scenario(std::string_view text) {
    auto b = parse_bundle(text);
    if (!b.scenario) throw Error(Errc::InvalidScenario, "file has no scenario section");
    return std::move(*b.scenario);
}

} // namespace texive
