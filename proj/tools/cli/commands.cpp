#include "commands.hpp"

#include "xbarsim/ideal.hpp"
#include "xbarsim/solver.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <sstream>

namespace xbarsim::cli {

namespace {

nlohmann::ordered_json embedded_config(const RunConfig& cfg) {
    // The output path is where the file went, not how it was computed; leaving
    // it out keeps reruns into a different file byte-identical.
    auto j = to_json(cfg);
    j["output"].erase("path");
    return j;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) {
        const auto b = f.find_first_not_of(" \t\r");
        const auto e = f.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : f.substr(b, e - b + 1));
    }
    return out;
}

bool parse_double(const std::string& s, double& v) {
    if (s.empty()) {
        return false;
    }
    std::size_t used = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        return false;
    }
    return used == s.size();
}

// Two numeric columns, x then y. Comment lines and one header row are skipped.
void read_samples(const std::string& path, std::vector<double>& x, std::vector<double>& y) {
    if (path.empty()) {
        throw InvalidInput("fit-sigmoid needs --input (or analysis.fit_input)");
    }
    std::ifstream in(path);
    if (!in) {
        throw InvalidInput("cannot open sample file '" + path + "'");
    }
    std::size_t lineno = 0;
    bool header_allowed = true;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const auto fields = split_csv_line(line);
        double xv = 0.0;
        double yv = 0.0;
        if (fields.size() < 2 || !parse_double(fields[0], xv) || !parse_double(fields[1], yv)) {
            if (header_allowed) {
                header_allowed = false;
                continue;
            }
            throw InvalidInput(path + ":" + std::to_string(lineno) +
                               ": expected two numeric columns x,y");
        }
        header_allowed = false;
        x.push_back(xv);
        y.push_back(yv);
    }
}

Report cmd_dotprod(const RunConfig& rc) {
    Report r;
    const auto cfg = rc.make_crossbar();
    const auto drive = rc.make_drive();
    const auto sys = assemble(cfg, drive);
    const auto dc = solve_dc(sys);
    const auto ideal = cfg.mode == DriveMode::Voltage ? ideal_voltage_mode(cfg.g, drive)
                                                      : ideal_current_mode(cfg.g, drive);
    r.columns = {"column", "ideal_a", "simulated_a", "abs_diff_a"};
    for (Eigen::Index j = 0; j < dc.column_currents.size(); ++j) {
        const double id = ideal.column_currents[j];
        const double sim = dc.column_currents[j];
        r.rows.push_back({std::int64_t{j}, id, sim, std::abs(sim - id)});
    }
    r.scalar("mode", std::string(to_string(cfg.mode)));
    r.scalar("dot_product_error", dot_product_error(dc.column_currents, ideal.column_currents));
    r.scalar("residual", dc.residual);
    return r;
}

Report cmd_sweep(const RunConfig& rc) {
    Report r;
    const auto dev = rc.make_device();
    const auto spec = rc.make_sweep();
    if (spec.values.empty()) {
        throw InvalidInput("analysis.sweep needs values or start/stop/count");
    }
    const auto drive = rc.make_drive();
    const auto res = run_sweep(dev, rc.make_crossbar(), drive, spec);
    r.columns.emplace_back(column_name(spec.parameter));
    for (const auto& c : res.columns) {
        r.columns.emplace_back(column_name(c.metric));
    }
    for (std::size_t k = 0; k < spec.values.size(); ++k) {
        std::vector<Cell> row{spec.values[k]};
        for (const auto& c : res.columns) {
            row.emplace_back(c.values[k]);
        }
        r.rows.push_back(std::move(row));
    }
    r.warnings = res.warnings;
    return r;
}

Report cmd_bandwidth(const RunConfig& rc) {
    Report r;
    const auto drive = rc.make_drive();
    const auto bw = compute_bandwidth(rc.make_crossbar(), drive, rc.analysis.column);
    r.scalar("column", static_cast<std::int64_t>(rc.analysis.column));
    r.scalar("bandwidth_hz", bw.hz);
    r.scalar("infinite", std::int64_t{bw.infinite});
    r.scalar("multi_pole", std::int64_t{bw.multi_pole});
    if (bw.multi_pole) {
        r.warnings.push_back("response rises before rolling off; first -3 dB crossing reported");
    }
    return r;
}

Report cmd_energy(const RunConfig& rc) {
    Report r;
    const auto drive = rc.make_drive();
    const auto e = compute_energy(rc.make_crossbar(), drive, rc.energy_options());
    r.scalar("energy_j", e.joules);
    r.scalar("window_s", e.window);
    r.scalar("settle_time_s", e.settle_time);
    r.scalar("dt_s", e.dt);
    return r;
}

Report cmd_montecarlo(const RunConfig& rc) {
    Report r;
    const auto drive = rc.make_drive();
    const auto st = monte_carlo(rc.make_device(), rc.make_crossbar(), drive, rc.make_monte_carlo());
    r.scalar("observable", rc.analysis.monte_carlo.observable);
    r.scalar("n_samples", static_cast<std::int64_t>(st.n_samples));
    r.scalar("seed", std::to_string(st.seed));
    r.scalar("clamped_fraction", st.clamped_fraction);
    r.scalar("unconverged_fits", static_cast<std::int64_t>(st.unconverged_fits));
    r.columns = {"parameter", "nominal", "mean", "std"};
    for (const auto& p : st.parameters) {
        r.rows.push_back({p.name, p.nominal, p.mean, p.std});
    }
    if (st.truncation_warning) {
        r.warnings.push_back("more than half of the conductance draws were clamped to the device range");
    }
    if (st.unconverged_fits > 0) {
        r.warnings.push_back(std::to_string(st.unconverged_fits) + " sample fits did not converge");
    }
    return r;
}

Report cmd_fit(const RunConfig& rc) {
    Report r;
    std::vector<double> x;
    std::vector<double> y;
    read_samples(rc.analysis.fit_input, x, y);
    const auto fit = fit_sigmoid(x, y, rc.neuron_params().output_unit);
    r.scalar("a", fit.params.a);
    r.scalar("b", fit.params.b);
    r.scalar("c", fit.params.c);
    r.scalar("rmse", *fit.params.rmse);
    r.scalar("initial_rmse", fit.initial_rmse);
    r.scalar("iterations", static_cast<std::int64_t>(fit.iterations));
    r.scalar("converged", std::int64_t{fit.converged});
    r.scalar("samples", static_cast<std::int64_t>(x.size()));
    if (!fit.converged) {
        r.warnings.push_back("fit stopped at the iteration limit");
    }
    return r;
}

Report cmd_transfer(const RunConfig& rc) {
    Report r;
    const auto params = rc.neuron_params();
    const std::string unit(to_string(params.output_unit));
    if (!rc.analysis.currents.empty()) {
        r.columns = {"input_a", "output_" + std::string(unit == "A" ? "a" : "v")};
        for (double i : rc.analysis.currents) {
            r.rows.push_back({i, sigmoid(params, i)});
        }
        return r;
    }
    const auto cfg = rc.make_crossbar();
    const auto drive = rc.make_drive();
    const auto dc = solve_dc(assemble(cfg, drive));
    r.columns = {"column", "current_a", "output_" + std::string(unit == "A" ? "a" : "v")};
    for (Eigen::Index j = 0; j < dc.column_currents.size(); ++j) {
        r.rows.push_back({std::int64_t{j}, dc.column_currents[j], sigmoid(params, dc.column_currents[j])});
    }
    return r;
}

Report cmd_presets() {
    Report r;
    r.columns = {"label", "a", "b", "c", "rmse", "output_unit", "z_in_ohm", "bandwidth_hz",
                 "power_w", "vdd_v"};
    for (const auto& p : builtin_presets()) {
        r.rows.push_back({p.label, p.params.a, p.params.b, p.params.c,
                          p.params.rmse ? Cell(*p.params.rmse) : Cell(std::string()),
                          std::string(to_string(p.params.output_unit)), p.z_in, p.bandwidth,
                          p.power, p.vdd});
    }
    return r;
}

}  // namespace

int exit_code_for(const std::exception& e) noexcept {
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        switch (err->kind()) {
        case ErrorKind::InvalidInput:
        case ErrorKind::OutOfRange:
        case ErrorKind::Infeasible:
        case ErrorKind::NoFit:
            return kExitInvalid;
        case ErrorKind::NumericalFailure:
            return kExitNumerical;
        case ErrorKind::Timeout:
            return kExitTimeout;
        }
    }
    return kExitNumerical;
}

Report execute(const std::string& command, const RunConfig& cfg) {
    Report r;
    if (command == "dotprod") {
        r = cmd_dotprod(cfg);
    } else if (command == "sweep") {
        r = cmd_sweep(cfg);
    } else if (command == "bandwidth") {
        r = cmd_bandwidth(cfg);
    } else if (command == "energy") {
        r = cmd_energy(cfg);
    } else if (command == "montecarlo") {
        r = cmd_montecarlo(cfg);
    } else if (command == "fit-sigmoid") {
        r = cmd_fit(cfg);
    } else if (command == "neuron-transfer") {
        r = cmd_transfer(cfg);
    } else if (command == "presets") {
        r = cmd_presets();
    } else {
        throw InvalidInput("unknown subcommand '" + command + "'");
    }
    r.command = command;
    r.config = embedded_config(cfg);
    return r;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"xbarsim"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Memristive crossbar simulator", "xbarsim"};
    app.require_subcommand(1, 1);
    app.fallthrough();

    std::string config_path;
    std::string out_path;
    std::string format;
    std::string rerun_path;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> sets;
    app.add_option("--config", config_path, "YAML configuration file")->check(CLI::ExistingFile);
    app.add_option("--out", out_path, "result file (overrides output.path)");
    app.add_option("--seed", seed, "random seed (overrides analysis.seed)");
    app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--set", sets, "override a config key, e.g. --set parasitics.r_t=100");
    app.add_option("--rerun", rerun_path, "reuse the config embedded in a result file")
        ->check(CLI::ExistingFile)
        ->excludes("--config");

    const std::vector<std::pair<std::string, std::string>> commands{
        {"dotprod", "circuit and ideal column currents"},
        {"sweep", "sweep one parameter and record metrics"},
        {"bandwidth", "-3 dB frequency of one column"},
        {"energy", "source energy for a step drive"},
        {"montecarlo", "conductance and neuron variation statistics"},
        {"fit-sigmoid", "fit a, b, c to sampled transfer data"},
        {"neuron-transfer", "apply the neuron to column currents"},
        {"presets", "list built-in neuron presets"},
    };
    std::string fit_input;
    std::vector<double> currents;
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        if (name == "fit-sigmoid") {
            sub->add_option("--input", fit_input, "CSV with x,y columns")->check(CLI::ExistingFile);
        } else if (name == "neuron-transfer") {
            sub->add_option("--current", currents, "input current in amperes (repeatable)");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInvalid;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        std::vector<Override> overrides;
        for (const auto& s : sets) {
            overrides.push_back(parse_override(s));
        }
        if (seed) {
            overrides.emplace_back("analysis.seed", std::to_string(*seed));
        }
        if (!out_path.empty()) {
            overrides.emplace_back("output.path", out_path);
        }
        if (!format.empty()) {
            overrides.emplace_back("output.format", format);
        }
        if (!fit_input.empty()) {
            overrides.emplace_back("analysis.fit_input", fit_input);
        }
        if (!currents.empty()) {
            std::string list = "[";
            for (std::size_t k = 0; k < currents.size(); ++k) {
                list += (k ? ", " : "") + format_number(currents[k]);
            }
            overrides.emplace_back("analysis.currents", list + "]");
        }

        RunConfig cfg;
        if (!rerun_path.empty()) {
            cfg = parse_config(extract_embedded_config(rerun_path), rerun_path, overrides);
        } else if (!config_path.empty()) {
            cfg = load_config(config_path, overrides);
        } else {
            cfg = default_config(overrides);
        }

        const Report report = execute(command, cfg);
        std::ostringstream buf;
        if (cfg.output.format == OutputFormat::Json) {
            write_json(report, buf);
        } else {
            write_csv(report, buf);
        }
        for (const auto& w : report.warnings) {
            err << "warning: " << w << "\n";
        }
        if (cfg.output.path.empty()) {
            out << buf.str();
        } else {
            std::ofstream file(cfg.output.path, std::ios::binary | std::ios::trunc);
            if (!file || !(file << buf.str()) || !file.flush()) {
                err << "error: cannot write '" << cfg.output.path << "'\n";
                return kExitNumerical;
            }
        }
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

}  // namespace xbarsim::cli
