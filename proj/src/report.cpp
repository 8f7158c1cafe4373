#include "vrcom/report.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

using nlohmann::json;

namespace vrcom {

namespace {

std::string fmt_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{}) throw DataError("bad numeric field '" + s + "'");
    return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (const char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

} // namespace

std::string outcomes_to_csv(const std::vector<ScenarioOutcome>& outcomes) {
    std::string out = "scenario,mode,step_kw,result,initial_feeder_kw,initial_vpp_kw,"
                      "vpp_change_kw,il_shed_kw,iterations,initial_min_v,final_min_v,seed\n";
    for (const auto& o : outcomes) {
        out += std::to_string(o.scenario_index);
        out += ',';
        out += to_string(o.kind);
        out += ',';
        out += fmt_double(o.step_kw);
        out += ',';
        out += to_string(o.result);
        out += ',';
        out += fmt_double(o.initial_feeder_kw);
        out += ',';
        out += fmt_double(o.initial_vpp_kw);
        out += ',';
        out += fmt_double(o.vpp_change_kw);
        out += ',';
        out += fmt_double(o.il_shed_kw);
        out += ',';
        out += std::to_string(o.iterations);
        out += ',';
        out += fmt_double(o.initial_min_v);
        out += ',';
        out += fmt_double(o.final_min_v);
        out += ',';
        out += std::to_string(o.seed);
        out += '\n';
    }
    return out;
}

std::vector<ScenarioOutcome> outcomes_from_csv(const std::string& text) {
    std::vector<ScenarioOutcome> outcomes;
    std::istringstream in(text);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        const auto f = split_csv_line(line);
        if (f.size() != 12) throw DataError("outcome row has " + std::to_string(f.size()) +
                                            " fields, expected 12");
        ScenarioOutcome o;
        o.scenario_index = std::stoi(f[0]);
        o.kind = dispatch_kind_from_string(f[1]);
        o.step_kw = parse_double(f[2]);
        o.result = outcome_kind_from_string(f[3]);
        o.initial_feeder_kw = parse_double(f[4]);
        o.initial_vpp_kw = parse_double(f[5]);
        o.vpp_change_kw = parse_double(f[6]);
        o.il_shed_kw = parse_double(f[7]);
        o.iterations = std::stoi(f[8]);
        o.initial_min_v = parse_double(f[9]);
        o.final_min_v = parse_double(f[10]);
        o.seed = std::stoull(f[11]);
        outcomes.push_back(o);
    }
    return outcomes;
}

void write_outcomes_csv(const std::vector<ScenarioOutcome>& outcomes,
                        const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeError("cannot write " + path.string());
    out << outcomes_to_csv(outcomes);
}

std::vector<ScenarioOutcome> read_outcomes_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return outcomes_from_csv(buf.str());
}

namespace {

json moments_to_json(const Moments& m) {
    return {{"count", m.count}, {"mean", m.mean}, {"stddev", m.stddev},
            {"max", m.max},     {"min", m.min}};
}

Moments moments_from_json(const json& j) {
    Moments m;
    m.count = j.at("count").get<std::size_t>();
    m.mean = j.at("mean").get<double>();
    m.stddev = j.at("stddev").get<double>();
    m.max = j.at("max").get<double>();
    m.min = j.at("min").get<double>();
    return m;
}

json group_to_json(const GroupStats& g) {
    return {{"count", g.count},
            {"initial_feeder_kw", moments_to_json(g.initial_feeder_kw)},
            {"initial_vpp_kw", moments_to_json(g.initial_vpp_kw)},
            {"vpp_change_kw", moments_to_json(g.vpp_change_kw)},
            {"il_shed_kw", moments_to_json(g.il_shed_kw)},
            {"iterations", moments_to_json(g.iterations)}};
}

GroupStats group_from_json(const json& j) {
    GroupStats g;
    g.count = j.at("count").get<std::size_t>();
    g.initial_feeder_kw = moments_from_json(j.at("initial_feeder_kw"));
    g.initial_vpp_kw = moments_from_json(j.at("initial_vpp_kw"));
    g.vpp_change_kw = moments_from_json(j.at("vpp_change_kw"));
    g.il_shed_kw = moments_from_json(j.at("il_shed_kw"));
    g.iterations = moments_from_json(j.at("iterations"));
    return g;
}

} // namespace

std::string stats_to_json(const CampaignStats& stats, double critical_kw) {
    json doc;
    doc["critical_kw"] = critical_kw;
    doc["cells"] = json::array();
    for (const auto& c : stats.cells) {
        doc["cells"].push_back({{"mode", to_string(c.kind)},
                                {"step_kw", c.step_kw},
                                {"scenarios", c.scenarios},
                                {"no_violation", c.no_violation},
                                {"discarded", c.discarded},
                                {"success_rate_pct", c.success_rate_pct},
                                {"zero_change_fraction", c.zero_change_fraction},
                                {"successes", group_to_json(c.successes)},
                                {"failures", group_to_json(c.failures)}});
    }
    return doc.dump(2) + "\n";
}

CampaignStats stats_from_json(const std::string& text, double* critical_kw) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("stats json: ") + e.what());
    }
    if (critical_kw) *critical_kw = doc.value("critical_kw", 0.0);
    CampaignStats stats;
    for (const auto& j : doc.at("cells")) {
        CellStats c;
        c.kind = dispatch_kind_from_string(j.at("mode").get<std::string>());
        c.step_kw = j.at("step_kw").get<double>();
        c.scenarios = j.at("scenarios").get<std::size_t>();
        c.no_violation = j.at("no_violation").get<std::size_t>();
        c.discarded = j.at("discarded").get<std::size_t>();
        c.success_rate_pct = j.at("success_rate_pct").get<double>();
        c.zero_change_fraction = j.at("zero_change_fraction").get<double>();
        c.successes = group_from_json(j.at("successes"));
        c.failures = group_from_json(j.at("failures"));
        stats.cells.push_back(std::move(c));
    }
    return stats;
}

void write_stats_json(const CampaignStats& stats, double critical_kw,
                      const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeError("cannot write " + path.string());
    out << stats_to_json(stats, critical_kw);
}

namespace {

std::string fixed(double v, int prec = 2) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(prec);
    os << v;
    return os.str();
}

void table_for_group(std::ostringstream& os, const std::string& title, const GroupStats& g,
                     bool redispatch) {
    os << title << " (" << g.count << " scenarios)\n";
    if (g.count == 0) {
        os << "  (none)\n\n";
        return;
    }
    os << "              feeder_kw";
    if (redispatch) os << "   vpp0_kw";
    os << "  change_kw  il_shed_kw  iterations\n";
    auto row = [&](const char* name, double a, double b, double c, double d, double e) {
        os << "  " << name;
        for (std::size_t pad = std::string(name).size(); pad < 10; ++pad) os << ' ';
        os << fixed(a, 0);
        for (std::size_t pad = fixed(a, 0).size(); pad < 9; ++pad) os << ' ';
        if (redispatch) {
            os << ' ' << fixed(b, 0);
            for (std::size_t pad = fixed(b, 0).size(); pad < 9; ++pad) os << ' ';
        }
        os << ' ' << fixed(c, 0);
        for (std::size_t pad = fixed(c, 0).size(); pad < 10; ++pad) os << ' ';
        os << ' ' << fixed(d, 0);
        for (std::size_t pad = fixed(d, 0).size(); pad < 11; ++pad) os << ' ';
        os << ' ' << fixed(e, 2) << '\n';
    };
    row("average", g.initial_feeder_kw.mean, g.initial_vpp_kw.mean, g.vpp_change_kw.mean,
        g.il_shed_kw.mean, g.iterations.mean);
    row("std dev", g.initial_feeder_kw.stddev, g.initial_vpp_kw.stddev, g.vpp_change_kw.stddev,
        g.il_shed_kw.stddev, g.iterations.stddev);
    row("maximum", g.initial_feeder_kw.max, g.initial_vpp_kw.max, g.vpp_change_kw.max,
        g.il_shed_kw.max, g.iterations.max);
    row("minimum", g.initial_feeder_kw.min, g.initial_vpp_kw.min, g.vpp_change_kw.min,
        g.il_shed_kw.min, g.iterations.min);
    os << '\n';
}

} // namespace

std::string format_stats_tables(const CampaignStats& stats) {
    std::ostringstream os;
    for (const auto& c : stats.cells) {
        os << "=== " << to_string(c.kind) << ", step " << fixed(c.step_kw, 0) << " kW ===\n";
        os << "scenarios " << c.scenarios << ", no-violation " << c.no_violation
           << ", discarded " << c.discarded << ", success rate " << fixed(c.success_rate_pct)
           << "%, zero-change successes " << fixed(100.0 * c.zero_change_fraction, 1) << "%\n";
        const bool redispatch = c.kind == DispatchKind::Redispatch;
        table_for_group(os, "successful support", c.successes, redispatch);
        table_for_group(os, "failed support", c.failures, redispatch);
    }
    return os.str();
}

std::string trace_to_csv(const RegulationOutcome& outcome) {
    std::string out = "iteration,pass,step_kw,demand_kw,raised_kw,reduced_kw,accepted,"
                      "full_headroom,min_v,max_v,metric,rest_after,segment_lo,segment_hi\n";
    for (const auto& r : outcome.trace) {
        out += std::to_string(r.iteration);
        out += ',';
        out += std::to_string(r.pass);
        out += ',';
        out += fmt_double(r.step_kw);
        out += ',';
        out += fmt_double(r.demand_kw);
        out += ',';
        out += fmt_double(r.raised_kw);
        out += ',';
        out += fmt_double(r.reduced_kw);
        out += ',';
        out += r.accepted ? "1" : "0";
        out += ',';
        out += r.full_headroom ? "1" : "0";
        out += ',';
        out += fmt_double(r.min_v);
        out += ',';
        out += fmt_double(r.max_v);
        out += ',';
        out += fmt_double(r.metric);
        out += ',';
        out += fmt_double(r.rest_after);
        out += ',';
        out += fmt_double(r.segment_lo);
        out += ',';
        out += fmt_double(r.segment_hi);
        out += '\n';
    }
    return out;
}

std::string profile_plot_svg(const RegulationOutcome& outcome, const MainBody& body,
                             double v_min, double v_max) {
    const int width = 860, height = 480;
    const int ml = 60, mr = 20, mt = 20, mb = 40;

    // x axis: chain position coordinate; series: initial + accepted steps.
    std::vector<const std::vector<double>*> series;
    if (!outcome.initial_profile.empty()) series.push_back(&outcome.initial_profile);
    for (const auto& r : outcome.trace)
        if (r.accepted && !r.profile.empty()) series.push_back(&r.profile);

    double lo = v_min, hi = 1.02;
    for (const auto* s : series)
        for (const std::size_t k : body.chain) {
            lo = std::min(lo, (*s)[k]);
            hi = std::max(hi, (*s)[k]);
        }
    lo -= 0.005;
    hi += 0.005;

    const double x_span = body.total_length() > 0 ? body.total_length() : 1.0;
    auto sx = [&](double coord) { return ml + coord / x_span * (width - ml - mr); };
    auto sy = [&](double v) { return mt + (hi - v) / (hi - lo) * (height - mt - mb); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
       << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    auto hline = [&](double v, const char* color, const char* dash) {
        os << "<line x1=\"" << sx(0.0) << "\" y1=\"" << sy(v) << "\" x2=\"" << sx(x_span)
           << "\" y2=\"" << sy(v) << "\" stroke=\"" << color << "\" stroke-dasharray=\"" << dash
           << "\"/>\n";
        os << "<text x=\"4\" y=\"" << sy(v) + 4 << "\" font-size=\"12\">" << fixed(v, 2)
           << "</text>\n";
    };
    hline(v_min, "#cc0000", "6,3");
    if (hi > v_max) hline(v_max, "#cc0000", "6,3");
    hline(1.0, "#999999", "2,4");

    const char* colors[] = {"#444444", "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                            "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22"};
    for (std::size_t s = 0; s < series.size(); ++s) {
        os << "<polyline fill=\"none\" stroke=\"" << colors[s % 10] << "\" stroke-width=\""
           << (s == 0 ? 2 : 1.5) << "\" points=\"";
        for (std::size_t p = 0; p < body.chain.size(); ++p)
            os << sx(body.chain_coordinate[p]) << ',' << sy((*series[s])[body.chain[p]]) << ' ';
        os << "\"/>\n";
        os << "<text x=\"" << width - mr - 70 << "\" y=\"" << mt + 14 * (s + 1)
           << "\" font-size=\"12\" fill=\"" << colors[s % 10] << "\">"
           << (s == 0 ? std::string("initial") : "step " + std::to_string(s)) << "</text>\n";
    }

    os << "<text x=\"" << width / 2 - 90 << "\" y=\"" << height - 8 << "\" font-size=\"12\">"
       << "electric distance from feeder head (p.u. |Z|)</text>\n";
    os << "<text x=\"8\" y=\"14\" font-size=\"12\">bus voltage (p.u.)</text>\n";
    os << "</svg>\n";
    return os.str();
}

ReportFiles emit_report(const CampaignResult& result, const std::filesystem::path& outdir) {
    std::filesystem::create_directories(outdir);
    ReportFiles files;
    files.outcomes_csv = outdir / "outcomes.csv";
    files.stats_json = outdir / "stats.json";
    files.tables_txt = outdir / "tables.txt";
    write_outcomes_csv(result.outcomes, files.outcomes_csv);
    write_stats_json(result.stats, result.critical_kw, files.stats_json);
    std::ofstream tables(files.tables_txt, std::ios::binary);
    if (!tables) throw RuntimeError("cannot write " + files.tables_txt.string());
    tables << format_stats_tables(result.stats);
    return files;
}

} // namespace vrcom
