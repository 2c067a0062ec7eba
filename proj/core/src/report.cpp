#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "chopsim/harness.hpp"

namespace chopsim {

namespace {

using nlohmann::json;

std::string fixed6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

json optional_name(const auto& v) { return v ? json(std::string(to_string(*v))) : json(nullptr); }

json trace_json_lines(const EpisodeTrace& trace) {
    json lines = json::array();
    const std::string text = trace_to_jsonl(trace);
    std::size_t start = 0;
    while (start < text.size()) {
        const std::size_t end = text.find('\n', start);
        lines.push_back(json::parse(text.substr(start, end - start)));
        start = end + 1;
    }
    return lines;
}

}  // namespace

std::string metrics_to_csv(const Metrics& metrics) {
    std::string out = "experiment,component,class,style,successes,trials,rate,ci_low,ci_high\n";
    for (const Tally& t : metrics.tallies) {
        if (t.trials == 0) continue;
        const Interval ci = wilson_interval(t.successes, t.trials);
        out += csv_field(metrics.experiment) + "," + csv_field(t.component) + ",";
        out += (t.food_class ? std::string(to_string(*t.food_class)) : std::string()) + ",";
        out += (t.style ? std::string(to_string(*t.style)) : std::string()) + ",";
        out += std::to_string(t.successes) + "," + std::to_string(t.trials) + ",";
        out += fixed6(t.rate()) + "," + fixed6(ci.low) + "," + fixed6(ci.high) + "\n";
    }
    return out;
}

std::string metrics_to_json(const Metrics& metrics) {
    json tallies = json::array();
    for (const Tally& t : metrics.tallies) {
        const Interval ci = wilson_interval(t.successes, t.trials);
        tallies.push_back({{"component", t.component},
                           {"class", optional_name(t.food_class)},
                           {"style", optional_name(t.style)},
                           {"successes", t.successes},
                           {"trials", t.trials},
                           {"rate", t.rate()},
                           {"ci_low", ci.low},
                           {"ci_high", ci.high}});
    }
    const json doc = {{"experiment", metrics.experiment},
                      {"trials", metrics.trials},
                      {"episode_successes", metrics.episode_successes},
                      {"components", std::move(tallies)}};
    return doc.dump(2) + "\n";
}

Metrics metrics_from_json(std::string_view text) {
    try {
        const json doc = json::parse(text);
        Metrics m;
        m.experiment = doc.at("experiment").get<std::string>();
        m.trials = doc.at("trials").get<std::uint64_t>();
        m.episode_successes = doc.at("episode_successes").get<std::uint64_t>();
        for (const json& t : doc.at("components")) {
            Tally tally;
            tally.component = t.at("component").get<std::string>();
            if (!t.at("class").is_null()) {
                tally.food_class = parse_food_class(t.at("class").get<std::string>());
                if (!tally.food_class) throw std::invalid_argument("unknown class in metrics");
            }
            if (!t.at("style").is_null()) {
                tally.style = parse_cut_style(t.at("style").get<std::string>());
                if (!tally.style) throw std::invalid_argument("unknown style in metrics");
            }
            tally.successes = t.at("successes").get<std::uint64_t>();
            tally.trials = t.at("trials").get<std::uint64_t>();
            m.tallies.push_back(std::move(tally));
        }
        return m;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed metrics JSON: ") + e.what());
    }
}

std::string rows_to_jsonl(const std::vector<TrialRow>& rows) {
    std::string out;
    for (const TrialRow& r : rows) {
        json counters = json::object();
        for (const auto& [name, value] : r.counters) counters[name] = value;
        json line = {{"index", r.index},
                     {"seed", r.seed},
                     {"task", r.task},
                     {"success", r.success},
                     {"iterations", r.iterations},
                     {"counters", std::move(counters)}};
        if (r.trace) line["trace"] = trace_json_lines(*r.trace);
        out += line.dump();
        out += '\n';
    }
    return out;
}

}  // namespace chopsim
