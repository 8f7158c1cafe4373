#include "vrcom/campaign.hpp"
#include "vrcom/com.hpp"
#include "vrcom/controller.hpp"
#include "vrcom/fixtures.hpp"
#include "vrcom/kernels.hpp"
#include "vrcom/report.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace vrcom;
using nlohmann::json;

namespace {

struct CommonOptions {
    std::string network_path;
    std::string fleet_path;
    std::string out_dir;
    double loading = 1.0;
    ControllerConfig controller;
    std::string weighting = "magnitude";
    std::string lsplus_order = "farthest";

    void finalize() {
        if (out_dir.empty()) {
            if (const char* env = std::getenv("VRCOM_OUT_DIR")) out_dir = env;
            if (out_dir.empty()) out_dir = ".";
        }
        if (weighting == "magnitude")
            controller.weighting = ComWeighting::Magnitude;
        else if (weighting == "real-part")
            controller.weighting = ComWeighting::RealPart;
        else
            throw DataError("com weighting must be magnitude|real-part");
        if (lsplus_order == "farthest")
            controller.lsplus_nearest_first = false;
        else if (lsplus_order == "nearest")
            controller.lsplus_nearest_first = true;
        else
            throw DataError("increase-list order must be farthest|nearest");
        controller.validate();
    }
};

void add_controller_flags(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--v-min", opt.controller.v_min, "lower voltage limit, p.u.");
    cmd->add_option("--v-max", opt.controller.v_max, "upper voltage limit, p.u.");
    cmd->add_option("--theta-small", opt.controller.theta_small_fraction,
                    "step-doubling threshold as a fraction of the remaining deficit");
    cmd->add_option("--lesser-part", opt.controller.lesser_part_fraction,
                    "minimum lesser-part length as a fraction of the main body");
    cmd->add_option("--iteration-cap", opt.controller.iteration_cap,
                    "maximum dispatch iterations per run");
    cmd->add_option("--tol", opt.controller.solver.tolerance, "power-flow tolerance, p.u.");
    cmd->add_option("--com-weighting", opt.weighting, "mass weights: magnitude|real-part");
    cmd->add_option("--lsplus-order", opt.lsplus_order,
                    "increase-list ordering: farthest|nearest");
}

std::vector<Complex> scaled_loads(const NetworkModel& model, double scale) {
    std::vector<Complex> loads(model.base_load_pu().begin(), model.base_load_pu().end());
    for (auto& s : loads) s *= scale;
    return loads;
}

struct ScenarioFile {
    double loading = 1.0;
    std::map<int, double> multipliers;   // bus id -> extra multiplier
    std::map<int, double> setpoints;     // actor id -> kW
    std::map<int, double> availability;  // actor id -> factor
};

ScenarioFile load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open scenario file " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
    ScenarioFile sf;
    sf.loading = doc.value("loading", 1.0);
    if (doc.contains("multipliers"))
        for (const auto& [k, v] : doc["multipliers"].items())
            sf.multipliers[std::stoi(k)] = v.get<double>();
    if (doc.contains("setpoints"))
        for (const auto& [k, v] : doc["setpoints"].items())
            sf.setpoints[std::stoi(k)] = v.get<double>();
    if (doc.contains("availability"))
        for (const auto& [k, v] : doc["availability"].items())
            sf.availability[std::stoi(k)] = v.get<double>();
    return sf;
}

int cmd_pf(const CommonOptions& opt, const std::string& out_file) {
    const NetworkModel model = load_network(opt.network_path);
    std::vector<Complex> inj(model.size());
    const auto loads = scaled_loads(model, opt.loading);
    for (std::size_t k = 0; k < model.size(); ++k) inj[k] = -loads[k];
    if (!opt.fleet_path.empty()) {
        const Fleet fleet = load_fleet(opt.fleet_path);
        validate_fleet(model, fleet);
        inj = decompose(model, loads, fleet).injections();
    }

    const VoltageSolution sol = solve(model, inj, opt.controller.solver);
    if (!sol.report.converged) {
        std::cerr << "power flow did not converge after " << sol.report.iterations
                  << " iterations (max mismatch " << sol.report.max_mismatch << ")\n";
        return 1;
    }

    std::ostringstream os;
    os << "bus,v_pu,theta_rad,p_kw,q_kvar\n";
    const auto calc = calculated_injections(model, sol);
    for (std::size_t k = 0; k < model.size(); ++k) {
        os << model.id_of(k) << ',' << sol.vm[k] << ',' << sol.va[k] << ','
           << model.pu_to_kw(calc[k].real()) << ',' << model.pu_to_kw(calc[k].imag()) << '\n';
    }
    if (out_file.empty() || out_file == "-") {
        std::cout << os.str();
    } else {
        std::ofstream out(out_file, std::ios::binary);
        if (!out) throw RuntimeError("cannot write " + out_file);
        out << os.str();
    }
    const auto [bus, v] = min_voltage(model, sol);
    std::cerr << "converged in " << sol.report.iterations << " iterations; min V " << v
              << " at bus " << bus << "; slack " << model.pu_to_kw(sol.slack_injection_pu.real())
              << " kW\n";
    return 0;
}

int cmd_topology(const CommonOptions& opt) {
    const NetworkModel model = load_network(opt.network_path);
    const MainBody body = extract_main_body(model);
    std::cout << "position,bus,coordinate_pu,branch_buses\n";
    for (std::size_t p = 0; p < body.chain.size(); ++p) {
        std::cout << p << ',' << model.id_of(body.chain[p]) << ',' << body.chain_coordinate[p]
                  << ',';
        const auto& branch = body.branch_buses[p];
        for (std::size_t i = 0; i < branch.size(); ++i) {
            if (i) std::cout << ';';
            std::cout << model.id_of(branch[i]);
        }
        std::cout << '\n';
    }
    return 0;
}

int cmd_com(const CommonOptions& opt) {
    const NetworkModel model = load_network(opt.network_path);
    const MainBody body = extract_main_body(model);
    const auto loads = scaled_loads(model, opt.loading);

    Fleet fleet;
    if (!opt.fleet_path.empty()) {
        fleet = load_fleet(opt.fleet_path);
        validate_fleet(model, fleet);
    }
    const auto decomposition = decompose(model, loads, fleet);
    const VoltageSolution sol = solve(model, decomposition.injections(), opt.controller.solver);
    if (!sol.report.converged) {
        std::cerr << "power flow did not converge\n";
        return 1;
    }

    const CoordInterval full{0.0, body.total_length()};
    const Centers centers =
        compute_all_centers(model, body, sol, decomposition.absorbed, decomposition.injected,
                            full, opt.controller.weighting, opt.controller.weight_floor);

    auto print_center = [&](const char* name, const std::optional<CenterOfMass>& c) {
        std::cout << name << ": ";
        if (!c) {
            std::cout << "(no center: zero mass)\n";
            return;
        }
        std::cout << c->g << " +/- " << c->delta_g << "  (weight " << c->total_weight
                  << " p.u.)\n";
    };
    print_center("g_L ", centers.load);
    print_center("g_G ", centers.generation);
    print_center("g_GL", centers.net);

    // Textual mass diagram along the chain.
    const int cols = 100;
    std::string load_row(cols, '.');
    std::string gen_row(cols, '.');
    auto col_of = [&](double coord) {
        const double f = body.total_length() > 0 ? coord / body.total_length() : 0.0;
        return std::min(cols - 1, std::max(0, static_cast<int>(f * (cols - 1))));
    };
    for (std::size_t k = 0; k < model.size(); ++k) {
        if (k == model.head()) continue;
        const int c = col_of(body.coordinate[k]);
        const Complex v = sol.voltage(k);
        if (std::abs(std::conj(decomposition.absorbed[k] / v)) >= opt.controller.weight_floor)
            load_row[c] = 'L';
        if (std::abs(std::conj(decomposition.injected[k] / v)) >= opt.controller.weight_floor)
            gen_row[c] = 'G';
    }
    auto mark = [&](std::string& row, const std::optional<CenterOfMass>& c, char ch) {
        if (c) row[col_of(c->g)] = ch;
    };
    std::string center_row(cols, ' ');
    mark(center_row, centers.load, 'l');
    mark(center_row, centers.generation, 'g');
    mark(center_row, centers.net, 'n');
    std::cout << "loads: " << load_row << '\n';
    std::cout << "gen:   " << gen_row << '\n';
    std::cout << "ctrs:  " << center_row << "  (l=g_L g=g_G n=g_GL)\n";
    return 0;
}

int cmd_regulate(const CommonOptions& opt, const std::string& scenario_path,
                 const std::string& mode_str, double step_kw) {
    const NetworkModel model = load_network(opt.network_path);
    const MainBody body = extract_main_body(model);
    Fleet fleet = load_fleet(opt.fleet_path);
    validate_fleet(model, fleet);

    const DispatchKind kind = dispatch_kind_from_string(mode_str);
    auto loads = scaled_loads(model, opt.loading);
    if (!scenario_path.empty()) {
        const ScenarioFile sf = load_scenario_file(scenario_path);
        for (auto& s : loads) s *= sf.loading / opt.loading;
        for (const auto& [bus, mult] : sf.multipliers) loads[model.index_of(bus)] *= mult;
        for (auto& actor : fleet.actors) {
            if (const auto it = sf.availability.find(actor.id); it != sf.availability.end())
                actor.availability = it->second;
            if (const auto it = sf.setpoints.find(actor.id); it != sf.setpoints.end())
                actor.setpoint_kw = it->second;
        }
        validate_fleet(model, fleet);
    }
    if (kind == DispatchKind::Dispatch)
        for (auto& actor : fleet.actors)
            if (actor.is_dg() || actor.kind == ActorKind::Storage) actor.setpoint_kw = 0.0;

    ControllerConfig cfg = opt.controller;
    cfg.capture_profiles = true;
    const RegulationOutcome outcome = regulate(model, body, fleet, loads, kind, step_kw, cfg);

    std::filesystem::create_directories(opt.out_dir);
    const auto trace_path = std::filesystem::path(opt.out_dir) / "trace.csv";
    std::ofstream trace(trace_path, std::ios::binary);
    trace << trace_to_csv(outcome);

    json summary = {{"success", outcome.success},
                    {"mode", outcome.mode == RegulationMode::Undervoltage ? "undervoltage"
                                                                          : "overvoltage"},
                    {"initial_converged", outcome.initial_converged},
                    {"initial_violation", outcome.initial_violation},
                    {"iterations", outcome.iterations},
                    {"vpp_change_kw", outcome.vpp_change_kw},
                    {"il_shed_kw", outcome.il_shed_kw},
                    {"initial_min_v", outcome.initial_min_v},
                    {"final_min_v", outcome.final_min_v},
                    {"final_max_v", outcome.final_max_v},
                    {"initial_metric", outcome.initial_metric},
                    {"final_metric", outcome.final_metric},
                    {"failure_reason", outcome.failure_reason}};
    const auto outcome_path = std::filesystem::path(opt.out_dir) / "outcome.json";
    std::ofstream oj(outcome_path, std::ios::binary);
    oj << summary.dump(2) << '\n';

    const auto svg_path = std::filesystem::path(opt.out_dir) / "profile.svg";
    std::ofstream svg(svg_path, std::ios::binary);
    svg << profile_plot_svg(outcome, body, cfg.v_min, cfg.v_max);

    std::cout << summary.dump(2) << '\n';
    std::cerr << "wrote " << trace_path.string() << ", " << outcome_path.string() << ", "
              << svg_path.string() << '\n';
    return 0;
}

int cmd_campaign(const CommonOptions& opt, const std::string& steps_str,
                 const std::string& modes_str, int count, std::uint64_t seed, int jobs) {
    const NetworkModel model = load_network(opt.network_path);
    const MainBody body = extract_main_body(model);
    const Fleet fleet = load_fleet(opt.fleet_path);
    validate_fleet(model, fleet);

    CampaignConfig cfg;
    cfg.controller = opt.controller;
    cfg.count = count;
    cfg.seed = seed;
    cfg.jobs = jobs;
    cfg.steps_kw.clear();
    {
        std::istringstream ss(steps_str);
        std::string tok;
        while (std::getline(ss, tok, ',')) cfg.steps_kw.push_back(std::stod(tok));
    }
    cfg.kinds.clear();
    {
        std::istringstream ss(modes_str);
        std::string tok;
        while (std::getline(ss, tok, ',')) cfg.kinds.push_back(dispatch_kind_from_string(tok));
    }
    if (cfg.steps_kw.empty() || cfg.kinds.empty())
        throw DataError("campaign needs at least one step and one mode");

    const CampaignResult result = run_campaign(model, body, fleet, cfg);
    const ReportFiles files = emit_report(result, opt.out_dir);

    std::cout << "critical loading: " << result.critical_kw << " kW\n";
    for (const auto& c : result.stats.cells)
        std::cout << to_string(c.kind) << " step " << c.step_kw << " kW: success rate "
                  << c.success_rate_pct << "% (" << c.scenarios << " scenarios, "
                  << c.no_violation << " without violation, " << c.discarded << " discarded)\n";
    std::cerr << "wrote " << files.outcomes_csv.string() << ", " << files.stats_json.string()
              << ", " << files.tables_txt.string() << '\n';
    return 0;
}

int cmd_report(const std::string& outcomes_path, const std::string& stats_path,
               const std::string& out_dir) {
    const auto outcomes = read_outcomes_csv(outcomes_path);
    const CampaignStats recomputed = aggregate(outcomes);

    double critical_kw = 0.0;
    if (!stats_path.empty()) {
        std::ifstream in(stats_path, std::ios::binary);
        if (!in) throw DataError("cannot open " + stats_path);
        std::ostringstream buf;
        buf << in.rdbuf();
        const CampaignStats shipped = stats_from_json(buf.str(), &critical_kw);
        const std::string a = stats_to_json(shipped, critical_kw);
        const std::string b = stats_to_json(recomputed, critical_kw);
        if (a != b) {
            std::cerr << "stats.json does not match statistics recomputed from outcomes\n";
            return 1;
        }
        std::cerr << "stats.json matches recomputed statistics\n";
    }

    std::filesystem::create_directories(out_dir);
    const auto tables_path = std::filesystem::path(out_dir) / "tables.txt";
    std::ofstream tables(tables_path, std::ios::binary);
    tables << format_stats_tables(recomputed);
    std::cout << format_stats_tables(recomputed);
    return 0;
}

int cmd_fixtures(const std::string& emit_dir) {
    for (const auto& fx : fixtures::fixture_catalog()) {
        std::cout << fx.name << ": " << fx.description << '\n';
        for (const auto& note : fx.notes)
            std::cout << "  - " << note.field << ": " << note.source << '\n';
    }
    if (!emit_dir.empty()) {
        std::filesystem::create_directories(emit_dir);
        save_network(fixtures::build_two_bus(),
                     std::filesystem::path(emit_dir) / "two_bus.json");
        std::cerr << "calibrating the R-26 reconstruction...\n";
        const NetworkModel rhodes = fixtures::build_rhodes_calibrated();
        save_network(rhodes, std::filesystem::path(emit_dir) / "rhodes_r26.json");
        save_fleet(fixtures::build_rhodes_fleet(),
                   std::filesystem::path(emit_dir) / "rhodes_vpp.json");
        std::cerr << "wrote two_bus.json, rhodes_r26.json, rhodes_vpp.json to " << emit_dir
                  << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"voltage regulation on radial feeders by VPP re-dispatching around "
                 "current centers of mass"};
    app.set_config("--config", "", "configuration file with long-option values");
    app.require_subcommand(1);

    CommonOptions opt;

    auto* pf = app.add_subcommand("pf", "solve one power-flow case, emit per-bus CSV");
    std::string pf_out;
    pf->add_option("--network", opt.network_path, "network file")->required();
    pf->add_option("--loading", opt.loading, "uniform load scale");
    pf->add_option("--fleet", opt.fleet_path, "fleet file (applies scheduled injections)");
    pf->add_option("--out", pf_out, "output CSV path (default stdout)");
    add_controller_flags(pf, opt);

    auto* topo = app.add_subcommand("topology", "print main body, coordinates, branches");
    topo->add_option("--network", opt.network_path, "network file")->required();

    auto* com = app.add_subcommand("com", "print the three centers of mass for a solved case");
    com->add_option("--network", opt.network_path, "network file")->required();
    com->add_option("--loading", opt.loading, "uniform load scale");
    com->add_option("--fleet", opt.fleet_path, "fleet file");
    add_controller_flags(com, opt);

    auto* reg = app.add_subcommand("regulate", "run one regulation case, emit trace and plot");
    std::string reg_scenario, reg_mode = "redispatch";
    double reg_step = 300.0;
    reg->add_option("--network", opt.network_path, "network file")->required();
    reg->add_option("--fleet", opt.fleet_path, "fleet file")->required();
    reg->add_option("--scenario", reg_scenario, "scenario file (loading/setpoints)");
    reg->add_option("--mode", reg_mode, "dispatch|redispatch");
    reg->add_option("--step", reg_step, "re-dispatching step, kW");
    reg->add_option("--loading", opt.loading, "uniform load scale");
    reg->add_option("--out", opt.out_dir, "output directory");
    add_controller_flags(reg, opt);

    auto* camp = app.add_subcommand("campaign", "Monte-Carlo campaign over modes and steps");
    std::string camp_steps = "300,400,500", camp_modes = "dispatch,redispatch";
    int camp_count = 1000, camp_jobs = 1;
    std::uint64_t camp_seed = 42;
    camp->add_option("--network", opt.network_path, "network file")->required();
    camp->add_option("--fleet", opt.fleet_path, "fleet file")->required();
    camp->add_option("--steps", camp_steps, "comma-separated steps, kW");
    camp->add_option("--modes", camp_modes, "comma-separated: dispatch,redispatch");
    camp->add_option("--count", camp_count, "scenarios per (mode, step)");
    camp->add_option("--seed", camp_seed, "master seed");
    camp->add_option("--jobs", camp_jobs, "worker threads");
    camp->add_option("--out", opt.out_dir, "output directory");
    add_controller_flags(camp, opt);

    auto* rep = app.add_subcommand("report", "re-read campaign outputs, verify and format");
    std::string rep_outcomes, rep_stats, rep_out;
    rep->add_option("--outcomes", rep_outcomes, "outcomes.csv path")->required();
    rep->add_option("--stats", rep_stats, "stats.json path to verify against");
    rep->add_option("--out", rep_out, "output directory")->default_val(".");

    auto* fx = app.add_subcommand("fixtures", "list bundled fixtures with provenance notes");
    std::string fx_emit;
    fx->add_option("--emit", fx_emit, "write fixture files into this directory");

    auto* kern = app.add_subcommand("kernels", "print the active arithmetic backend");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        opt.finalize();
        if (pf->parsed()) return cmd_pf(opt, pf_out);
        if (topo->parsed()) return cmd_topology(opt);
        if (com->parsed()) return cmd_com(opt);
        if (reg->parsed()) return cmd_regulate(opt, reg_scenario, reg_mode, reg_step);
        if (camp->parsed())
            return cmd_campaign(opt, camp_steps, camp_modes, camp_count, camp_seed, camp_jobs);
        if (rep->parsed()) return cmd_report(rep_outcomes, rep_stats, rep_out);
        if (fx->parsed()) return cmd_fixtures(fx_emit);
        if (kern->parsed()) {
            std::cout << kernels::active_name() << '\n';
            return 0;
        }
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
