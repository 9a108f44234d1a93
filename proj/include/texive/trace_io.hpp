#pragma once

// Sensor trace and keystroke log containers with their CSV / JSONL codecs.
//
// Trace CSV:
//   t_ms,ax,ay,az,mx,my,mz,gx,gy,gz
//   0,0,0,9.81,30,0,40,0,0,0
//   ...
//   # label,start_ms,end_ms,name
//   # label,0,4500,Walking
//   # rate_hz,20
//
// Floats are written in shortest round-trip form, so parse(serialize(t)) == t.

#include "error.hpp"
#include "labels.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace texive {

using Vec3 = Eigen::Vector3d;

inline constexpr double kDefaultRateHz = 20.0;

struct SensorSample {
    std::int64_t t_ms = 0;
    Vec3 accel = Vec3::Zero();  // m/s^2, body frame
    Vec3 mag = Vec3::Zero();    // uT, body frame
    Vec3 gyro = Vec3::Zero();   // rad/s, body frame

    bool operator==(const SensorSample& o) const {
        return t_ms == o.t_ms && accel == o.accel && mag == o.mag && gyro == o.gyro;
    }
};

struct LabelSpan {
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
    ActivityLabel label = ActivityLabel::Other;

    bool operator==(const LabelSpan&) const = default;
};

struct Trace {
    std::vector<SensorSample> samples;
    double nominal_rate_hz = kDefaultRateHz;
    std::vector<LabelSpan> labels;

    bool operator==(const Trace&) const = default;
};

enum class KeyKind { Letter, Backspace };

struct KeyEvent {
    std::int64_t t_ms = 0;
    KeyKind kind = KeyKind::Letter;

    bool operator==(const KeyEvent&) const = default;
};

struct KeystrokeLog {
    std::vector<KeyEvent> events;

    bool operator==(const KeystrokeLog&) const = default;
};

enum class TraceFormat { Csv, Jsonl };

inline constexpr std::string_view kTraceCsvHeader = "t_ms,ax,ay,az,mx,my,mz,gx,gy,gz";
inline constexpr std::string_view kKeystrokeCsvHeader = "t_ms,kind";

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::string line_msg(std::size_t line, std::string_view why) {
    return "line " + std::to_string(line) + ": " + std::string(why);
}

inline std::int64_t parse_int(std::string_view tok, std::size_t line) {
    tok = trim(tok);
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || tok.empty())
        throw Error(Errc::MalformedRecord, line_msg(line, "bad integer '" + std::string(tok) + "'"));
    return v;
}

inline double parse_real(std::string_view tok, std::size_t line) {
    tok = trim(tok);
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    double v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || tok.empty())
        throw Error(Errc::MalformedRecord, line_msg(line, "bad number '" + std::string(tok) + "'"));
    if (!std::isfinite(v))
        throw Error(Errc::NonFiniteValue, line_msg(line, "non-finite value '" + std::string(tok) + "'"));
    return v;
}

// Splits into lines; a trailing newline does not produce an empty last line.
inline std::vector<std::string_view> lines_of(std::string_view text) {
    auto lines = split(text, '\n');
    if (!lines.empty() && lines.back().empty()) lines.pop_back();
    for (auto& l : lines) {
        if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    }
    return lines;
}

inline void check_sample(const SensorSample& s, std::size_t line) {
    auto finite = [](const Vec3& v) { return v.allFinite(); };
    if (!finite(s.accel) || !finite(s.mag) || !finite(s.gyro))
        throw Error(Errc::NonFiniteValue, line_msg(line, "non-finite channel value"));
    if (s.t_ms < 0) throw Error(Errc::MalformedRecord, line_msg(line, "negative timestamp"));
}

} // namespace detail

inline void validate_trace(const Trace& trace) {
    if (!(trace.nominal_rate_hz > 0) || !std::isfinite(trace.nominal_rate_hz))
        throw Error(Errc::MalformedRecord, "nominal rate must be positive");
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        detail::check_sample(trace.samples[i], i + 2);
        if (i > 0 && trace.samples[i].t_ms <= trace.samples[i - 1].t_ms)
            throw Error(Errc::NonMonotonicTimestamp,
                        "sample " + std::to_string(i) + ": t_ms " + std::to_string(trace.samples[i].t_ms) +
                            " not after " + std::to_string(trace.samples[i - 1].t_ms));
    }
    if (trace.labels.empty()) return;
    if (trace.samples.empty()) throw Error(Errc::MalformedRecord, "labels on an empty trace");
    const auto first = trace.samples.front().t_ms;
    const auto last = trace.samples.back().t_ms;
    for (std::size_t i = 0; i < trace.labels.size(); ++i) {
        const auto& span = trace.labels[i];
        if (span.start_ms > span.end_ms || span.start_ms < first || span.end_ms > last)
            throw Error(Errc::MalformedRecord, "label span " + std::to_string(i) + " outside trace");
        if (i > 0 && span.start_ms < trace.labels[i - 1].end_ms)
            throw Error(Errc::MalformedRecord, "label span " + std::to_string(i) + " overlaps its predecessor");
    }
}

inline Trace parse_trace_csv(std::string_view text) {
    Trace trace;
    auto lines = detail::lines_of(text);
    if (lines.empty() || detail::trim(lines[0]) != kTraceCsvHeader)
        throw Error(Errc::MalformedRecord, detail::line_msg(1, "expected header '" + std::string(kTraceCsvHeader) + "'"));

    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        auto line = detail::trim(lines[i]);
        if (line.empty()) continue;
        if (line.front() == '#') {
            line.remove_prefix(1);
            auto fields = detail::split(detail::trim(line), ',');
            auto key = detail::trim(fields[0]);
            if (key == "label" && fields.size() == 4 && detail::trim(fields[1]) == "start_ms") continue;
            if (key == "label") {
                if (fields.size() != 4) throw Error(Errc::MalformedRecord, detail::line_msg(lineno, "label needs 3 fields"));
                auto lab = parse_activity_label(detail::trim(fields[3]));
                if (!lab) throw Error(Errc::MalformedRecord, detail::line_msg(lineno, "unknown label"));
                trace.labels.push_back({detail::parse_int(fields[1], lineno), detail::parse_int(fields[2], lineno), *lab});
            } else if (key == "rate_hz" && fields.size() == 2) {
                trace.nominal_rate_hz = detail::parse_real(fields[1], lineno);
            }
            continue;
        }
        auto fields = detail::split(line, ',');
        if (fields.size() != 10)
            throw Error(Errc::MalformedRecord, detail::line_msg(lineno, "expected 10 fields, got " + std::to_string(fields.size())));
        SensorSample s;
        s.t_ms = detail::parse_int(fields[0], lineno);
        for (int k = 0; k < 3; ++k) {
            s.accel[k] = detail::parse_real(fields[1 + k], lineno);
            s.mag[k] = detail::parse_real(fields[4 + k], lineno);
            s.gyro[k] = detail::parse_real(fields[7 + k], lineno);
        }
        detail::check_sample(s, lineno);
        if (!trace.samples.empty() && s.t_ms <= trace.samples.back().t_ms)
            throw Error(Errc::NonMonotonicTimestamp,
                        detail::line_msg(lineno, "t_ms " + std::to_string(s.t_ms) + " not after " +
                                                     std::to_string(trace.samples.back().t_ms)));
        trace.samples.push_back(s);
    }
    validate_trace(trace);
    return trace;
}

namespace detail {

inline Vec3 json_vec3(const nlohmann::json& j, const char* key, std::size_t lineno) {
    if (!j.contains(key)) throw Error(Errc::MalformedRecord, line_msg(lineno, std::string("missing '") + key + "'"));
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() != 3)
        throw Error(Errc::MalformedRecord, line_msg(lineno, std::string("'") + key + "' must be a 3-array"));
    Vec3 v;
    for (int k = 0; k < 3; ++k) {
        if (a[k].is_null()) throw Error(Errc::NonFiniteValue, line_msg(lineno, "null channel value"));
        if (!a[k].is_number()) throw Error(Errc::MalformedRecord, line_msg(lineno, "non-numeric channel value"));
        v[k] = a[k].get<double>();
    }
    return v;
}

} // namespace detail

inline Trace parse_trace_jsonl(std::string_view text) {
    Trace trace;
    auto lines = detail::lines_of(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        auto line = detail::trim(lines[i]);
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(Errc::MalformedRecord, detail::line_msg(lineno, e.what()));
        }
        if (!j.is_object()) throw Error(Errc::MalformedRecord, detail::line_msg(lineno, "expected an object"));
        try {
            if (!j.contains("t_ms")) {
                if (j.contains("nominal_rate_hz")) trace.nominal_rate_hz = j.at("nominal_rate_hz").get<double>();
                if (j.contains("labels")) {
                    for (const auto& l : j.at("labels")) {
                        auto lab = parse_activity_label(l.at("name").get<std::string>());
                        if (!lab) throw Error(Errc::MalformedRecord, detail::line_msg(lineno, "unknown label"));
                        trace.labels.push_back({l.at("start_ms").get<std::int64_t>(), l.at("end_ms").get<std::int64_t>(), *lab});
                    }
                }
                continue;
            }
            if (!j.at("t_ms").is_number_integer())
                throw Error(Errc::MalformedRecord, detail::line_msg(lineno, "t_ms must be an integer"));
            SensorSample s;
            s.t_ms = j.at("t_ms").get<std::int64_t>();
            s.accel = detail::json_vec3(j, "accel", lineno);
            s.mag = detail::json_vec3(j, "mag", lineno);
            s.gyro = detail::json_vec3(j, "gyro", lineno);
            detail::check_sample(s, lineno);
            if (!trace.samples.empty() && s.t_ms <= trace.samples.back().t_ms)
                throw Error(Errc::NonMonotonicTimestamp,
                            detail::line_msg(lineno, "t_ms " + std::to_string(s.t_ms) + " not after " +
                                                         std::to_string(trace.samples.back().t_ms)));
            trace.samples.push_back(s);
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::MalformedRecord, detail::line_msg(lineno, e.what()));
        }
    }
    validate_trace(trace);
    return trace;
}

inline Trace parse_trace(std::string_view bytes, TraceFormat format) {
    return format == TraceFormat::Csv ? parse_trace_csv(bytes) : parse_trace_jsonl(bytes);
}

inline std::string serialize_trace_csv(const Trace& trace) {
    std::string out;
    out.reserve(trace.samples.size() * 64 + 64);
    out += kTraceCsvHeader;
    out += '\n';
    for (const auto& s : trace.samples) {
        out += std::to_string(s.t_ms);
        for (const Vec3* v : {&s.accel, &s.mag, &s.gyro}) {
            for (int k = 0; k < 3; ++k) {
                out += ',';
                out += detail::format_double((*v)[k]);
            }
        }
        out += '\n';
    }
    if (!trace.labels.empty()) {
        out += "# label,start_ms,end_ms,name\n";
        for (const auto& l : trace.labels) {
            out += "# label," + std::to_string(l.start_ms) + "," + std::to_string(l.end_ms) + "," +
                   std::string(label_name(l.label)) + "\n";
        }
    }
    out += "# rate_hz," + detail::format_double(trace.nominal_rate_hz) + "\n";
    return out;
}

inline std::string serialize_trace_jsonl(const Trace& trace) {
    auto vec = [](const Vec3& v) { return nlohmann::json::array({v[0], v[1], v[2]}); };
    nlohmann::json head = {{"nominal_rate_hz", trace.nominal_rate_hz}};
    auto labels = nlohmann::json::array();
    for (const auto& l : trace.labels)
        labels.push_back({{"start_ms", l.start_ms}, {"end_ms", l.end_ms}, {"name", std::string(label_name(l.label))}});
    head["labels"] = labels;
    std::string out = head.dump() + "\n";
    for (const auto& s : trace.samples) {
        nlohmann::json j = {{"t_ms", s.t_ms}, {"accel", vec(s.accel)}, {"mag", vec(s.mag)}, {"gyro", vec(s.gyro)}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

inline std::string serialize_trace(const Trace& trace, TraceFormat format) {
    return format == TraceFormat::Csv ? serialize_trace_csv(trace) : serialize_trace_jsonl(trace);
}

inline std::int64_t grid_period_ms(double rate_hz) {
    if (!(rate_hz > 0) || !std::isfinite(rate_hz)) throw Error(Errc::InvalidParams, "rate must be positive");
    auto p = static_cast<std::int64_t>(std::llround(1000.0 / rate_hz));
    if (p < 1) throw Error(Errc::InvalidParams, "rate above 1 kHz");
    return p;
}

// Linear interpolation onto t0 + k * round(1000 / rate_hz); the last grid point is
// the largest one not past the final input sample.
inline Trace resample(const Trace& trace, double rate_hz) {
    if (trace.samples.size() < 2) throw Error(Errc::EmptyTrace, "resampling needs at least 2 samples");
    const auto period = grid_period_ms(rate_hz);
    const auto& in = trace.samples;
    const auto t0 = in.front().t_ms;
    const auto t_end = in.back().t_ms;

    Trace out;
    out.nominal_rate_hz = rate_hz;
    out.samples.reserve(static_cast<std::size_t>((t_end - t0) / period + 1));
    std::size_t j = 0;
    for (auto t = t0; t <= t_end; t += period) {
        while (j + 1 < in.size() && in[j + 1].t_ms <= t) ++j;
        SensorSample s;
        s.t_ms = t;
        if (in[j].t_ms == t || j + 1 >= in.size()) {
            s.accel = in[j].accel;
            s.mag = in[j].mag;
            s.gyro = in[j].gyro;
        } else {
            const auto& a = in[j];
            const auto& b = in[j + 1];
            const double f = static_cast<double>(t - a.t_ms) / static_cast<double>(b.t_ms - a.t_ms);
            s.accel = a.accel + f * (b.accel - a.accel);
            s.mag = a.mag + f * (b.mag - a.mag);
            s.gyro = a.gyro + f * (b.gyro - a.gyro);
        }
        out.samples.push_back(s);
    }
    const auto last = out.samples.back().t_ms;
    for (auto l : trace.labels) {
        l.start_ms = std::clamp(l.start_ms, t0, last);
        l.end_ms = std::clamp(l.end_ms, t0, last);
        if (l.end_ms > l.start_ms) out.labels.push_back(l);
    }
    return out;
}

inline KeystrokeLog parse_keystrokes(std::string_view text) {
    KeystrokeLog log;
    auto lines = detail::lines_of(text);
    if (lines.empty() || detail::trim(lines[0]) != kKeystrokeCsvHeader)
        throw Error(Errc::MalformedRecord, detail::line_msg(1, "expected header '" + std::string(kKeystrokeCsvHeader) + "'"));
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        auto line = detail::trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        auto fields = detail::split(line, ',');
        if (fields.size() != 2) throw Error(Errc::MalformedRecord, detail::line_msg(lineno, "expected 2 fields"));
        KeyEvent e;
        e.t_ms = detail::parse_int(fields[0], lineno);
        auto kind = detail::trim(fields[1]);
        if (kind == "letter") e.kind = KeyKind::Letter;
        else if (kind == "backspace") e.kind = KeyKind::Backspace;
        else throw Error(Errc::MalformedRecord, detail::line_msg(lineno, "unknown kind '" + std::string(kind) + "'"));
        if (!log.events.empty() && e.t_ms < log.events.back().t_ms)
            throw Error(Errc::NonMonotonicTimestamp, detail::line_msg(lineno, "keystroke time went backwards"));
        log.events.push_back(e);
    }
    return log;
}

inline std::string serialize_keystrokes(const KeystrokeLog& log) {
    std::string out(kKeystrokeCsvHeader);
    out += '\n';
    for (const auto& e : log.events) {
        out += std::to_string(e.t_ms);
        out += e.kind == KeyKind::Letter ? ",letter\n" : ",backspace\n";
    }
    return out;
}

} // namespace texive
