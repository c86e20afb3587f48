#include "mixdiss/cli.hpp"

#include "mixdiss/errors.hpp"
#include "mixdiss/extract.hpp"
#include "mixdiss/interconnect.hpp"
#include "mixdiss/json_io.hpp"
#include "mixdiss/simulate.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <ostream>

namespace mixdiss {

namespace {

std::string digest(const nlohmann::json& inputs) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump_json(inputs)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return hash_hex(h);
}

nlohmann::json run_report(const std::string& command, const nlohmann::json& inputs, nlohmann::json results) {
    return {{"command", command},
            {"tool_version", kToolVersion},
            {"inputs", inputs},
            {"inputs_digest", digest(inputs)},
            {"results", std::move(results)}};
}

void emit(const nlohmann::json& report, const std::string& out_path, std::ostream& out) {
    if (out_path.empty()) {
        out << dump_json(report);
    } else {
        write_text_file(out_path, dump_json(report));
    }
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

int cmd_certify(const std::string& system_path, double omega_bar, double margin, const std::string& method_name,
                const std::string& out_path, bool timing, std::ostream& out, std::ostream& err) {
    const ExtractMethod method = [&] {
        try {
            return extract_method_from_string(method_name);
        } catch (const PreconditionFailure& e) {
            throw ParseError(e.what());
        }
    }();
    const SystemDescriptor sys = system_from_json(read_json_file(system_path));
    if (sys.kind != SystemDescriptor::Kind::Lti) {
        throw ParseError("certify needs an LTI system");
    }
    const Timer timer;
    const KypOptions kyp;
    const MixedLtiReport rep = extract_mixed_lti(sys.lti, omega_bar, margin, method, kyp);
    const nlohmann::json inputs{{"system", to_json(sys)}, {"omega_bar", omega_bar}, {"margin", margin},
                                {"method", to_string(method)}};
    nlohmann::json results = to_json(rep);
    results["tolerances"] = {{"grid_points", GridOptions{}.points},
                             {"kyp_sigma0", kyp.sigma0},
                             {"kyp_max_iterations", kyp.max_iterations},
                             {"certificate_margin_rule", "margin >= sigma / 2"},
                             {"epsilon_zero_floor", kEpsilonZeroFloor}};
    nlohmann::json report = run_report("certify", inputs, std::move(results));
    if (timing) report["wall_time_s"] = timer.seconds();
    emit(report, out_path, out);

    bool certified = true;
    for (const auto* q : {&rep.mu, &rep.gamma, &rep.epsilon}) certified = certified && q->method == ExtractMethod::Both;
    if (method == ExtractMethod::Kyp && !certified) {
        err << "certify: not every quantity obtained a KYP certificate\n";
        return kExitCheckFail;
    }
    return kExitPass;
}

int cmd_interconnect(const std::string& spec1_path, const std::string& spec2_path, int tau_steps,
                     const std::string& out_path, bool timing, std::ostream& out, std::ostream& err) {
    const SupplySpec s1 = spec_from_json(read_json_file(spec1_path));
    const SupplySpec s2 = spec_from_json(read_json_file(spec2_path));
    const Timer timer;
    InterconnectionVerdict v = check_theorem2(s1, s2);
    nlohmann::json results;
    if (tau_steps > 0 && v.stable) {
        try {
            const HomotopyGainBound b = homotopy_gain_bound(s1, s2, v.witnesses, tau_steps);
            v.gain_bound = b.gamma_cl;
            results["homotopy"] = to_json(b);
        } catch (const BranchInfeasible& e) {
            results["homotopy_error"] = e.what();
        }
    }
    results["verdict"] = to_json(v);
    const nlohmann::json inputs{{"spec1", to_json(s1)}, {"spec2", to_json(s2)}, {"tau_steps", tau_steps}};
    nlohmann::json report = run_report("interconnect", inputs, std::move(results));
    if (timing) report["wall_time_s"] = timer.seconds();
    emit(report, out_path, out);

    if (!v.hypotheses_ok) {
        for (const auto& h : v.failed_hypotheses) err << "interconnect: hypothesis failed: " << h << '\n';
        return kExitDomain;
    }
    if (!v.stable) {
        static const char* names[] = {"M'Theta1 M + p1 Pi2", "M'Pi1 M + p2 Theta2", "M'Theta1 M + p3 Theta2"};
        for (std::size_t i = 0; i < 3; ++i) {
            if (v.intervals[i].empty) err << "interconnect: no p >= 0 makes " << names[i] << " negative definite\n";
        }
        return kExitCheckFail;
    }
    if (tau_steps > 0 && !v.gain_bound) {
        err << "interconnect: " << report["results"]["homotopy_error"].get<std::string>() << '\n';
        return kExitCheckFail;
    }
    return kExitPass;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, bool timing, std::ostream& out,
                 std::ostream& err) {
    const nlohmann::json cfg = read_json_file(config_path);
    const Timer timer;
    CampaignResult res;
    try {
        res = run_campaign(cfg);
    } catch (const ConfigMismatch& e) {
        throw ParseError(e.what());
    }
    std::filesystem::create_directories(out_dir);
    nlohmann::json files = nlohmann::json::array();
    for (const auto& [name, tr] : res.trajectories) {
        const std::string file = name + ".csv";
        write_trajectory_csv((std::filesystem::path(out_dir) / file).string(), tr);
        files.push_back(file);
    }
    nlohmann::json results = res.summary;
    results["trajectory_files"] = files;
    nlohmann::json report = run_report("simulate", cfg, std::move(results));
    if (timing) report["wall_time_s"] = timer.seconds();
    const std::string path = (std::filesystem::path(out_dir) / "summary.json").string();
    write_text_file(path, dump_json(report));

    int failed = 0;
    for (const auto& r : res.summary["runs"]) failed += !r["passed"].get<bool>();
    out << "simulate: " << res.summary["runs"].size() << " runs, " << failed << " failed; summary in " << path << '\n';
    if (!res.all_passed) {
        err << "simulate: checks failed\n";
        return kExitCheckFail;
    }
    return kExitPass;
}

int cmd_reproduce(const std::string& out_dir, bool timing, std::ostream& out) {
    const Timer timer;
    const std::vector<ReproRow> rows = reproduce_rows();
    bool all = true;
    nlohmann::json table = nlohmann::json::array();
    char line[512];
    std::snprintf(line, sizeof line, "%-48s %14s %10s  %s\n", "quantity", "computed", "published", "status");
    out << line;
    for (const auto& r : rows) {
        all = all && r.pass;
        char ref[32] = "-";
        if (!std::isnan(r.reference)) std::snprintf(ref, sizeof ref, "%g", r.reference);
        std::snprintf(line, sizeof line, "%-48s %14.8g %10s  %s%s%s\n", r.name.c_str(), r.computed, ref,
                      r.pass ? "PASS" : "FAIL", r.note.empty() ? "" : "  ", r.note.c_str());
        out << line;
        table.push_back({{"name", r.name},
                         {"computed", json_number(r.computed)},
                         {"published", std::isnan(r.reference) ? nlohmann::json(nullptr) : nlohmann::json(r.reference)},
                         {"tolerance", r.tolerance},
                         {"pass", r.pass},
                         {"note", r.note}});
    }
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        nlohmann::json report = run_report("reproduce", nlohmann::json::object(),
                                           {{"rows", table}, {"all_pass", all}, {"seeds", {{"kyp_battery", 2024}}}});
        if (timing) report["wall_time_s"] = timer.seconds();
        write_text_file((std::filesystem::path(out_dir) / "reproduce.json").string(), dump_json(report));
    }
    return all ? kExitPass : kExitCheckFail;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Mixed small-gain/passivity analysis of feedback loops", "mixdiss"};
    app.require_subcommand(1);
    bool timing = false;
    app.add_flag("--timing", timing, "Add wall-clock time to reports (breaks byte-identical output)");
    app.set_version_flag("--version", kToolVersion);

    std::string system_path, out_path, method = "grid";
    double omega_bar = 0.0, margin = 0.0;
    auto* certify = app.add_subcommand("certify", "Extract and certify (mu, gamma, epsilon) of an LTI system");
    certify->add_option("--system", system_path, "System JSON")->required();
    certify->add_option("--omega-bar", omega_bar, "Crossover frequency")->required();
    certify->add_option("--margin", margin, "Additive margin on every quantity")->default_val(0.0);
    certify->add_option("--method", method, "grid|kyp|both")->default_val("grid");
    certify->add_option("--out", out_path, "Report path (stdout when omitted)");

    std::string spec1, spec2;
    int tau_steps = 0;
    auto* inter = app.add_subcommand("interconnect", "Check the loop conditions for two supply specs");
    inter->add_option("--spec1", spec1, "Supply spec of subsystem 1")->required();
    inter->add_option("--spec2", spec2, "Supply spec of subsystem 2")->required();
    inter->add_option("--gain-bound", tau_steps, "Compute the homotopy gain bound on this many tau points")
        ->check(CLI::Range(11, 100000));
    inter->add_option("--out", out_path, "Report path (stdout when omitted)");

    std::string config, out_dir;
    auto* sim = app.add_subcommand("simulate", "Run a simulation campaign");
    sim->add_option("--config", config, "Campaign JSON")->required();
    sim->add_option("--out", out_dir, "Output directory")->required();

    auto* repro = app.add_subcommand("reproduce", "Recompute the published numbers");
    repro->add_option("--out", out_dir, "Directory for reproduce.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitPass : kExitUsage;
    }

    try {
        if (*certify) return cmd_certify(system_path, omega_bar, margin, method, out_path, timing, out, err);
        if (*inter) return cmd_interconnect(spec1, spec2, tau_steps, out_path, timing, out, err);
        if (*sim) return cmd_simulate(config, out_dir, timing, out, err);
        if (*repro) return cmd_reproduce(out_dir, timing, out);
    } catch (const ParseError& e) {
        err << e.what() << '\n';
        return kExitUsage;
    } catch (const nlohmann::json::exception& e) {
        err << "ParseError: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << e.what() << '\n';
        return kExitDomain;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace mixdiss
