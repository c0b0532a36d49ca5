#include "cloudrca/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace cloudrca {

using nlohmann::json;

namespace {

// Days since 1970-01-01 for a proleptic Gregorian date (H. Hinnant's algorithm).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y += m <= 2;
}

Polarity parse_polarity(const std::string& s) {
    if (s == "positive") return Polarity::Positive;
    if (s == "negative") return Polarity::Negative;
    throw ValidationError("unknown polarity '" + s + "'");
}

}  // namespace

std::string format_iso8601(Timestamp ts) {
    std::int64_t days = ts / 86400;
    std::int64_t secs = ts % 86400;
    if (secs < 0) {
        secs += 86400;
        --days;
    }
    std::int64_t y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<long long>(y), m, d,
                  static_cast<long long>(secs / 3600), static_cast<long long>((secs / 60) % 60),
                  static_cast<long long>(secs % 60));
    return buf;
}

Timestamp parse_iso8601(std::string_view text) {
    int y, mo, d, h, mi, s;
    char tail = 0;
    const std::string str(text);
    const int n = std::sscanf(str.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &y, &mo, &d, &h, &mi, &s, &tail);
    if (n < 6 || (n == 7 && tail != 'Z') || mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60) {
        throw ValidationError("malformed ISO-8601 timestamp '" + str + "'");
    }
    return days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 86400 + h * 3600 + mi * 60 + s;
}

std::vector<TimeSeries> parse_metrics(std::istream& in) {
    struct Point {
        Timestamp ts;
        double value;
    };
    std::map<std::string, std::pair<std::string, std::vector<Point>>> groups;
    std::string line;
    std::size_t lineno = 0;
    std::size_t records = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
            const auto metric = j.at("metric_id").get<std::string>();
            const auto module = j.at("module_id").get<std::string>();
            const auto ts = j.contains("ts") ? j.at("ts").get<Timestamp>() : j.at("timestamp").get<Timestamp>();
            const auto value = j.at("value").get<double>();
            auto& g = groups[metric];
            if (g.second.empty()) {
                g.first = module;
            } else if (g.first != module) {
                throw ParseError("metric '" + metric + "' reported by two modules", lineno);
            }
            g.second.push_back({ts, value});
        } catch (const ParseError&) {
            throw;
        } catch (const json::exception& e) {
            throw ParseError(std::string("malformed metric record: ") + e.what(), lineno);
        }
        ++records;
    }
    if (records == 0) throw ValidationError("metrics file is empty");

    std::vector<TimeSeries> out;
    for (auto& [metric, g] : groups) {
        auto& pts = g.second;
        std::stable_sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.ts < b.ts; });
        TimeSeries s{metric, g.first, {}, {}};
        s.timestamps.reserve(pts.size());
        s.values.reserve(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i > 0 && pts[i].ts == pts[i - 1].ts) {
                throw ValidationError("duplicate timestamp " + std::to_string(pts[i].ts) + " for metric '" + metric +
                                      "'");
            }
            s.timestamps.push_back(pts[i].ts);
            s.values.push_back(pts[i].value);
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<TimeSeries> load_metrics(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open metrics file " + path.string());
    return parse_metrics(in);
}

void write_metrics(std::ostream& out, const std::vector<TimeSeries>& series) {
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            json j = {{"metric_id", s.metric_id}, {"module_id", s.module_id}, {"ts", s.timestamps[i]},
                      {"value", s.values[i]}};
            out << j.dump() << '\n';
        }
    }
}

std::vector<LogRecord> parse_logs(std::istream& in) {
    std::vector<LogRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto sp1 = line.find(' ');
        const auto sp2 = sp1 == std::string::npos ? sp1 : line.find(' ', sp1 + 1);
        if (sp2 == std::string::npos) throw ParseError("log line needs '<timestamp> <module> <message>'", lineno);
        LogRecord r;
        try {
            r.timestamp = parse_iso8601(std::string_view(line).substr(0, sp1));
        } catch (const ValidationError& e) {
            throw ParseError(e.what(), lineno);
        }
        r.module_id = line.substr(sp1 + 1, sp2 - sp1 - 1);
        r.message = line.substr(sp2 + 1);
        if (r.message.find_first_not_of(" \t") == std::string::npos) {
            throw ParseError("empty log message", lineno);
        }
        out.push_back(std::move(r));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const LogRecord& a, const LogRecord& b) { return a.timestamp < b.timestamp; });
    return out;
}

std::vector<LogRecord> load_logs(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open log file " + path.string());
    return parse_logs(in);
}

void write_logs(std::ostream& out, const std::vector<LogRecord>& logs) {
    for (const auto& r : logs) out << format_iso8601(r.timestamp) << ' ' << r.module_id << ' ' << r.message << '\n';
}

PlatformTopology parse_topology(const std::string& json_text) {
    PlatformTopology t;
    try {
        const json j = json::parse(json_text);
        t.platform_id = j.value("platform_id", std::string());
        for (const auto& m : j.at("modules")) t.modules.insert(m.get<std::string>());
        if (j.contains("metric_owner")) t.metric_owner = j.at("metric_owner").get<std::map<std::string, std::string>>();
        if (j.contains("pattern_owner")) {
            t.pattern_owner = j.at("pattern_owner").get<std::map<std::string, std::string>>();
        }
        t.cause_types = j.at("cause_types").get<std::map<std::string, std::string>>();
        if (j.contains("module_dependencies")) {
            for (const auto& e : j.at("module_dependencies")) {
                if (!e.is_array() || e.size() != 2) throw ValidationError("module dependency must be a [from, to] pair");
                t.module_dependencies.emplace(e[0].get<std::string>(), e[1].get<std::string>());
            }
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed topology document: ") + e.what());
    }
    t.validate();
    return t;
}

PlatformTopology load_topology(const std::filesystem::path& path) { return parse_topology(read_file(path)); }

std::string topology_to_json(const PlatformTopology& topo) {
    json deps = json::array();
    for (const auto& [a, b] : topo.module_dependencies) deps.push_back({a, b});
    json j = {{"platform_id", topo.platform_id},
              {"modules", topo.modules},
              {"metric_owner", topo.metric_owner},
              {"pattern_owner", topo.pattern_owner},
              {"cause_types", topo.cause_types},
              {"module_dependencies", deps}};
    return j.dump(2) + "\n";
}

Dataset parse_dataset(const std::string& json_text) {
    Dataset d;
    try {
        const json j = json::parse(json_text);
        d.platform_id = j.value("platform_id", std::string());
        d.feature_ids = j.at("feature_ids").get<std::vector<std::string>>();
        for (const auto& js : j.at("samples")) {
            Sample s;
            s.window_start = js.at("window_start").get<Timestamp>();
            s.window_end = js.at("window_end").get<Timestamp>();
            s.polarity = parse_polarity(js.at("polarity").get<std::string>());
            if (js.contains("label") && !js.at("label").is_null()) {
                s.label = Label{js.at("label").at("module_id").get<std::string>(),
                                js.at("label").at("type_id").get<std::string>()};
            }
            const auto bits = js.value("bits", std::string());
            s.bits.reserve(bits.size());
            for (char c : bits) {
                if (c != '0' && c != '1') throw ValidationError("feature bits must be '0' or '1'");
                s.bits.push_back(static_cast<std::uint8_t>(c - '0'));
            }
            d.samples.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed dataset document: ") + e.what());
    }
    d.validate();
    return d;
}

Dataset load_dataset(const std::filesystem::path& path) { return parse_dataset(read_file(path)); }

std::string dataset_to_json(const Dataset& d) {
    json samples = json::array();
    for (const auto& s : d.samples) {
        std::string bits;
        bits.reserve(s.bits.size());
        for (auto b : s.bits) bits.push_back(static_cast<char>('0' + b));
        json js = {{"window_start", s.window_start},
                   {"window_end", s.window_end},
                   {"polarity", s.polarity == Polarity::Positive ? "positive" : "negative"},
                   {"label", nullptr},
                   {"bits", bits}};
        if (s.label) js["label"] = {{"module_id", s.label->module_id}, {"type_id", s.label->type_id}};
        samples.push_back(std::move(js));
    }
    json j = {{"platform_id", d.platform_id}, {"feature_ids", d.feature_ids}, {"samples", samples}};
    return j.dump(1) + "\n";
}

namespace {

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double number_or_nan(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

std::string reports_to_json(const std::vector<AnomalyReport>& reports) {
    json arr = json::array();
    for (const auto& r : reports) {
        json findings = json::array();
        for (auto k : r.findings) findings.push_back(to_string(k));
        json spans = json::array();
        for (const auto& f : r.spans) spans.push_back({{"kind", to_string(f.kind)}, {"start", f.start}, {"end", f.end}});
        json stats = json::object();
        for (const auto& [name, t] : r.statistics) {
            stats[name] = {{"statistic", finite_or_null(t.statistic)},
                           {"threshold", finite_or_null(t.threshold)},
                           {"p_value", finite_or_null(t.p_value)},
                           {"decision", t.decision}};
        }
        arr.push_back({{"metric_id", r.metric_id},
                       {"window_start", r.window_start},
                       {"window_end", r.window_end},
                       {"period", r.period},
                       {"too_short", r.too_short},
                       {"findings", findings},
                       {"spans", spans},
                       {"statistics", stats}});
    }
    return arr.dump(1) + "\n";
}

std::vector<AnomalyReport> parse_reports(const std::string& json_text) {
    std::vector<AnomalyReport> out;
    try {
        const json arr = json::parse(json_text);
        if (!arr.is_array()) throw ValidationError("anomaly reports must be a JSON array");
        for (const auto& j : arr) {
            AnomalyReport r;
            r.metric_id = j.at("metric_id").get<std::string>();
            r.window_start = j.at("window_start").get<Timestamp>();
            r.window_end = j.at("window_end").get<Timestamp>();
            r.period = j.at("period").get<int>();
            r.too_short = j.at("too_short").get<bool>();
            for (const auto& k : j.at("findings")) r.findings.insert(anomaly_kind_from_string(k.get<std::string>()));
            for (const auto& f : j.at("spans")) {
                r.spans.push_back({anomaly_kind_from_string(f.at("kind").get<std::string>()),
                                   f.at("start").get<Timestamp>(), f.at("end").get<Timestamp>()});
            }
            for (const auto& [name, t] : j.at("statistics").items()) {
                TestOutcome o;
                o.statistic = number_or_nan(t.at("statistic"));
                o.threshold = number_or_nan(t.at("threshold"));
                o.p_value = number_or_nan(t.at("p_value"));
                o.decision = t.at("decision").get<bool>();
                r.statistics[name] = o;
            }
            if (r.window_end <= r.window_start) throw ValidationError("report window for " + r.metric_id + " is empty");
            out.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed anomaly reports: ") + e.what());
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

}  // namespace cloudrca
