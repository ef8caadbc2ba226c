#include "config.hpp"

#include "xbarsim/ideal.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace xbarsim::cli {

namespace {

std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

[[noreturn]] void fail(const std::string& path, const std::string& what, const YAML::Node& at) {
    const YAML::Mark m = at.Mark();
    std::ostringstream msg;
    msg << path << ": " << what;
    if (m.line >= 0) {
        msg << " (line " << m.line + 1 << ", column " << m.column + 1 << ")";
    }
    throw ConfigError(msg.str(), path, m.line + 1, m.column + 1);
}

// Map view that remembers which keys were consumed so the rest can be
// rejected as unknown.
class Section {
public:
    Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
        if (node_ && !node_.IsNull() && !node_.IsMap()) {
            fail(path_.empty() ? "<root>" : path_, "expected a mapping", node_);
        }
    }

    ~Section() = default;
    Section(const Section&) = delete;
    Section& operator=(const Section&) = delete;

    const std::string& path() const { return path_; }

    YAML::Node get(std::string_view key) {
        seen_.insert(std::string(key));
        if (!node_ || !node_.IsMap()) {
            return YAML::Node();
        }
        return node_[std::string(key)];
    }

    bool has(std::string_view key) {
        const YAML::Node n = get(key);
        return n && !n.IsNull();
    }

    Section child(std::string_view key) { return Section(get(key), join(path_, key)); }

    void finish() const {
        if (!node_ || !node_.IsMap()) {
            return;
        }
        for (auto it = node_.begin(); it != node_.end(); ++it) {
            const auto key = it->first.as<std::string>();
            if (!seen_.count(key)) {
                fail(join(path_, key), "unknown key '" + key + "'", it->first);
            }
        }
    }

    double number(std::string_view key, double fallback) {
        const YAML::Node n = get(key);
        return n && !n.IsNull() ? to_number(n, join(path_, key)) : fallback;
    }

    std::optional<double> optional_number(std::string_view key) {
        const YAML::Node n = get(key);
        if (!n || n.IsNull()) {
            return std::nullopt;
        }
        return to_number(n, join(path_, key));
    }

    std::uint64_t unsigned_integer(std::string_view key, std::uint64_t fallback) {
        const YAML::Node n = get(key);
        return n && !n.IsNull() ? to_unsigned(n, join(path_, key)) : fallback;
    }

    std::string text(std::string_view key, const std::string& fallback) {
        const YAML::Node n = get(key);
        if (!n || n.IsNull()) {
            return fallback;
        }
        if (!n.IsScalar()) {
            fail(join(path_, key), "expected a string", n);
        }
        return n.Scalar();
    }

    std::vector<double> numbers(std::string_view key) {
        const YAML::Node n = get(key);
        const std::string p = join(path_, key);
        std::vector<double> out;
        if (!n || n.IsNull()) {
            return out;
        }
        if (!n.IsSequence()) {
            fail(p, "expected a list of numbers", n);
        }
        for (std::size_t k = 0; k < n.size(); ++k) {
            out.push_back(to_number(n[k], p + "[" + std::to_string(k) + "]"));
        }
        return out;
    }

    std::vector<std::string> texts(std::string_view key, std::vector<std::string> fallback) {
        const YAML::Node n = get(key);
        const std::string p = join(path_, key);
        if (!n || n.IsNull()) {
            return fallback;
        }
        if (!n.IsSequence()) {
            fail(p, "expected a list of strings", n);
        }
        std::vector<std::string> out;
        for (std::size_t k = 0; k < n.size(); ++k) {
            if (!n[k].IsScalar()) {
                fail(p + "[" + std::to_string(k) + "]", "expected a string", n[k]);
            }
            out.push_back(n[k].Scalar());
        }
        return out;
    }

    static double to_number(const YAML::Node& n, const std::string& path) {
        if (!n.IsScalar()) {
            fail(path, "expected a number", n);
        }
        double v = 0.0;
        try {
            v = n.as<double>();
        } catch (const YAML::Exception&) {
            fail(path, "expected a number, got '" + n.Scalar() + "'", n);
        }
        if (!std::isfinite(v)) {
            fail(path, "number must be finite", n);
        }
        return v;
    }

    static std::uint64_t to_unsigned(const YAML::Node& n, const std::string& path) {
        if (!n.IsScalar() || n.Scalar().empty() || n.Scalar().front() == '-') {
            fail(path, "expected a non-negative integer", n);
        }
        try {
            return n.as<std::uint64_t>();
        } catch (const YAML::Exception&) {
            fail(path, "expected a non-negative integer, got '" + n.Scalar() + "'", n);
        }
    }

private:
    YAML::Node node_;
    std::string path_;
    std::set<std::string> seen_;
};

YAML::Node parse_document(std::string_view text, std::string_view source) {
    try {
        YAML::Node root = YAML::Load(std::string(text));
        if (!root || root.IsNull()) {
            root = YAML::Node(YAML::NodeType::Map);
        }
        return root;
    } catch (const YAML::ParserException& e) {
        std::ostringstream msg;
        msg << source << ":" << e.mark.line + 1 << ":" << e.mark.column + 1
            << ": parse error: " << e.msg;
        throw ConfigError(msg.str(), "", e.mark.line + 1, e.mark.column + 1);
    }
}

void apply_overrides(YAML::Node& root, const std::vector<Override>& overrides) {
    for (const auto& [path, value] : overrides) {
        std::vector<std::string> parts;
        std::stringstream ss(path);
        for (std::string part; std::getline(ss, part, '.');) {
            if (part.empty()) {
                throw ConfigError("override '" + path + "': empty key segment", path);
            }
            parts.push_back(part);
        }
        if (parts.empty()) {
            throw ConfigError("override has an empty key", path);
        }
        YAML::Node cur = root;
        for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
            YAML::Node next = cur[parts[k]];
            if (!next || next.IsNull()) {
                cur[parts[k]] = YAML::Node(YAML::NodeType::Map);
                next.reset(cur[parts[k]]);
            } else if (!next.IsMap()) {
                throw ConfigError("override '" + path + "': '" + parts[k] + "' is not a mapping",
                                  path);
            }
            cur.reset(next);
        }
        YAML::Node parsed;
        try {
            parsed = YAML::Load(value);
        } catch (const YAML::ParserException& e) {
            throw ConfigError("override '" + path + "': cannot parse value '" + value +
                                  "': " + e.msg,
                              path);
        }
        cur[parts.back()] = parsed;
    }
}

DriveMode parse_mode(const std::string& s, const std::string& path, const YAML::Node& at) {
    if (s == "voltage") {
        return DriveMode::Voltage;
    }
    if (s == "current") {
        return DriveMode::Current;
    }
    fail(path, "expected 'voltage' or 'current', got '" + s + "'", at);
}

template <typename Fn>
void check_invariant(const std::string& path, Fn&& fn) {
    try {
        fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(path + ": invariant violated: " + e.what(), path);
    }
}

std::vector<double> expand_range(double start, double stop, std::size_t count, Spacing spacing) {
    std::vector<double> out;
    if (count == 1) {
        out.push_back(start);
        return out;
    }
    for (std::size_t k = 0; k < count; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(count - 1);
        if (spacing == Spacing::Log) {
            out.push_back(std::pow(10.0, std::log10(start) + t * (std::log10(stop) - std::log10(start))));
        } else {
            out.push_back(start + t * (stop - start));
        }
    }
    out.front() = start;
    out.back() = stop;
    return out;
}

std::string mp_message(const std::string& path, const std::string& what) {
    return path + ".matrix: " + what;
}

RunConfig build(YAML::Node root) {
    RunConfig cfg;
    Section top(root, "");

    {
        Section s = top.child("device");
        cfg.device.g_off = s.number("g_off", cfg.device.g_off);
        cfg.device.g_on = s.number("g_on", cfg.device.g_on);
        cfg.device.v_th = s.number("v_th", cfg.device.v_th);
        cfg.device.k_mob = s.number("k_mob", cfg.device.k_mob);
        s.finish();
    }

    const std::uint64_t seed_default = [&] {
        Section peek(root["analysis"], "analysis");
        return peek.unsigned_integer("seed", cfg.analysis.seed);
    }();

    {
        Section s = top.child("crossbar");
        cfg.crossbar.n_rows = s.unsigned_integer("n_rows", cfg.crossbar.n_rows);
        cfg.crossbar.n_cols = s.unsigned_integer("n_cols", cfg.crossbar.n_cols);
        cfg.crossbar.source_resistance =
            s.number("source_resistance", cfg.crossbar.source_resistance);
        {
            Section c = s.child("conductance");
            auto& cb = cfg.crossbar.conductance;
            const std::string kind = c.text("kind", "uniform");
            if (kind == "uniform") {
                cb.kind = ConductanceKind::Uniform;
            } else if (kind == "matrix") {
                cb.kind = ConductanceKind::Matrix;
            } else if (kind == "random") {
                cb.kind = ConductanceKind::Random;
            } else {
                fail(c.path() + ".kind", "expected uniform, matrix or random, got '" + kind + "'",
                     c.get("kind"));
            }
            cb.value = c.number("value", cb.value);
            cb.min = c.number("min", cb.min);
            cb.max = c.number("max", cb.max);
            cb.seed = c.unsigned_integer("seed", seed_default);
            const YAML::Node m = c.get("matrix");
            if (m && !m.IsNull()) {
                const std::string mp = c.path() + ".matrix";
                if (!m.IsSequence()) {
                    fail(mp, "expected a list of rows", m);
                }
                for (std::size_t i = 0; i < m.size(); ++i) {
                    const std::string rp = mp + "[" + std::to_string(i) + "]";
                    if (!m[i].IsSequence()) {
                        fail(rp, "expected a list of numbers", m[i]);
                    }
                    std::vector<double> row;
                    for (std::size_t j = 0; j < m[i].size(); ++j) {
                        row.push_back(
                            Section::to_number(m[i][j], rp + "[" + std::to_string(j) + "]"));
                    }
                    cb.matrix.push_back(std::move(row));
                }
            }
            if (cb.kind == ConductanceKind::Matrix) {
                if (cb.matrix.size() != cfg.crossbar.n_rows) {
                    throw ConfigError(mp_message(c.path(), "matrix has " +
                                                               std::to_string(cb.matrix.size()) +
                                                               " rows, crossbar.n_rows is " +
                                                               std::to_string(cfg.crossbar.n_rows)),
                                      c.path() + ".matrix");
                }
                for (const auto& row : cb.matrix) {
                    if (row.size() != cfg.crossbar.n_cols) {
                        throw ConfigError(
                            mp_message(c.path(), "every matrix row needs crossbar.n_cols = " +
                                                     std::to_string(cfg.crossbar.n_cols) +
                                                     " entries"),
                            c.path() + ".matrix");
                    }
                }
            }
            c.finish();
        }
        if (s.has("normalize_rows")) {
            Section nr = s.child("normalize_rows");
            NormalizeBlock nb;
            const auto target = nr.optional_number("target");
            if (!target) {
                fail(nr.path() + ".target", "required when normalize_rows is present",
                     nr.get("target"));
            }
            nb.target = *target;
            nb.free_column = nr.unsigned_integer(
                "free_column", cfg.crossbar.n_cols > 0 ? cfg.crossbar.n_cols - 1 : 0);
            nr.finish();
            cfg.crossbar.normalize_rows = nb;
        }
        s.finish();
    }

    {
        const YAML::Node m = top.get("mode");
        if (m && !m.IsNull()) {
            if (!m.IsScalar()) {
                fail("mode", "expected 'voltage' or 'current'", m);
            }
            cfg.mode = parse_mode(m.Scalar(), "mode", m);
        }
    }

    {
        Section s = top.child("drive");
        const std::string kind = s.text("kind", "uniform");
        if (kind == "uniform") {
            cfg.drive.kind = DriveKind::Uniform;
        } else if (kind == "values") {
            cfg.drive.kind = DriveKind::Values;
        } else if (kind == "random") {
            cfg.drive.kind = DriveKind::Random;
        } else {
            fail("drive.kind", "expected uniform, values or random, got '" + kind + "'",
                 s.get("kind"));
        }
        const double unit = cfg.mode == DriveMode::Voltage ? 1.0 : 1e-6;
        cfg.drive.value = s.number("value", unit);
        cfg.drive.values = s.numbers("values");
        cfg.drive.min = s.number("min", 0.0);
        cfg.drive.max = s.number("max", unit);
        cfg.drive.seed = s.unsigned_integer("seed", seed_default);
        s.finish();
    }

    {
        Section s = top.child("parasitics");
        cfg.parasitics.r_p = s.number("r_p", 0.0);
        cfg.parasitics.c_p = s.number("c_p", 0.0);
        cfg.parasitics.r_t = s.number("r_t", 0.0);
        s.finish();
    }

    {
        Section s = top.child("neuron");
        const bool inline_given = s.has("a") || s.has("b") || s.has("c");
        const std::string preset = s.text("preset", inline_given ? "" : "cm-1.8");
        if (!preset.empty()) {
            if (inline_given) {
                fail(s.path(), "give either a preset or inline a/b/c, not both", s.get("preset"));
            }
            cfg.neuron.preset = preset;
        } else {
            cfg.neuron.preset.reset();
            auto& p = cfg.neuron.inline_params;
            p.a = s.number("a", p.a);
            p.b = s.number("b", p.b);
            p.c = s.number("c", p.c);
            const std::string unit = s.text("unit", "A");
            if (unit == "A") {
                p.output_unit = SignalUnit::Ampere;
            } else if (unit == "V") {
                p.output_unit = SignalUnit::Volt;
            } else {
                fail(s.path() + ".unit", "expected 'A' or 'V'", s.get("unit"));
            }
        }
        // Accept the keys in both forms so a resolved document round-trips.
        if (!inline_given) {
            s.get("unit");
        }
        s.finish();
    }

    {
        Section s = top.child("analysis");
        auto& a = cfg.analysis;
        a.seed = seed_default;
        s.get("seed");
        a.column = s.unsigned_integer("column", a.column);
        a.settle_rel = s.number("settle_rel", a.settle_rel);
        a.energy_window = s.optional_number("energy_window");
        a.max_time = s.number("max_time", a.max_time);
        a.steps_per_tau = s.number("steps_per_tau", a.steps_per_tau);
        a.fit_input = s.text("fit_input", "");
        a.currents = s.numbers("currents");
        {
            Section w = s.child("sweep");
            auto& sw = a.sweep;
            sw.parameter = w.text("parameter", sw.parameter);
            sw.values = w.numbers("values");
            sw.start = w.optional_number("start");
            sw.stop = w.optional_number("stop");
            sw.count = w.unsigned_integer("count", 0);
            const std::string spacing = w.text("spacing", "log");
            if (spacing == "log") {
                sw.spacing = Spacing::Log;
            } else if (spacing == "linear") {
                sw.spacing = Spacing::Linear;
            } else {
                fail(w.path() + ".spacing", "expected 'log' or 'linear'", w.get("spacing"));
            }
            sw.metrics = w.texts("metrics", sw.metrics);
            const bool range = sw.start || sw.stop || sw.count > 0;
            if (range) {
                if (!sw.values.empty()) {
                    throw ConfigError(w.path() + ": give either values or start/stop/count",
                                      w.path());
                }
                if (!sw.start || !sw.stop || sw.count == 0) {
                    throw ConfigError(w.path() + ": range form needs start, stop and count >= 1",
                                      w.path());
                }
                if (sw.spacing == Spacing::Log && (*sw.start <= 0.0 || *sw.stop <= 0.0)) {
                    throw ConfigError(w.path() + ": log spacing needs positive start and stop",
                                      w.path());
                }
                sw.values = expand_range(*sw.start, *sw.stop, sw.count, sw.spacing);
                sw.start.reset();
                sw.stop.reset();
                sw.count = 0;
            }
            w.finish();
        }
        {
            Section m = s.child("monte_carlo");
            auto& mc = a.monte_carlo;
            mc.samples = m.unsigned_integer("samples", mc.samples);
            mc.g_rel_std = m.number("g_rel_std", mc.g_rel_std);
            mc.neuron_rel_std = m.number("neuron_rel_std", mc.neuron_rel_std);
            mc.observable = m.text("observable", mc.observable);
            mc.ramp_points = m.unsigned_integer("ramp_points", mc.ramp_points);
            m.finish();
        }
        s.finish();
    }

    {
        Section s = top.child("output");
        cfg.output.path = s.text("path", "");
        const std::string format = s.text("format", "csv");
        if (format == "csv") {
            cfg.output.format = OutputFormat::Csv;
        } else if (format == "json") {
            cfg.output.format = OutputFormat::Json;
        } else {
            fail("output.format", "expected 'csv' or 'json', got '" + format + "'",
                 s.get("format"));
        }
        s.finish();
    }
    top.finish();
    return cfg;
}

void validate(const RunConfig& cfg) {
    std::optional<MemristorDevice> dev;
    check_invariant("device", [&] { dev.emplace(cfg.make_device()); });
    if (cfg.crossbar.n_rows < 1 || cfg.crossbar.n_cols < 1) {
        throw ConfigError("crossbar: invariant violated: n_rows and n_cols must be >= 1",
                          "crossbar");
    }
    if (cfg.crossbar.conductance.kind == ConductanceKind::Random &&
        !(cfg.crossbar.conductance.min <= cfg.crossbar.conductance.max)) {
        throw ConfigError("crossbar.conductance: invariant violated: min must not exceed max",
                          "crossbar.conductance");
    }
    check_invariant("parasitics", [&] { cfg.parasitics.validate(); });
    check_invariant("crossbar", [&] { cfg.make_crossbar().validate(*dev); });
    if (cfg.crossbar.normalize_rows &&
        cfg.crossbar.normalize_rows->free_column >= cfg.crossbar.n_cols) {
        throw ConfigError("crossbar.normalize_rows.free_column: outside the array",
                          "crossbar.normalize_rows.free_column");
    }
    if (cfg.drive.kind == DriveKind::Values && cfg.drive.values.size() != cfg.crossbar.n_rows) {
        throw ConfigError("drive.values: needs one entry per row (" +
                              std::to_string(cfg.crossbar.n_rows) + ")",
                          "drive.values");
    }
    if (cfg.drive.kind == DriveKind::Random && !(cfg.drive.min <= cfg.drive.max)) {
        throw ConfigError("drive: invariant violated: min must not exceed max", "drive");
    }
    check_invariant("neuron", [&] { cfg.neuron_params().validate(); });
    const auto& a = cfg.analysis;
    if (a.column >= cfg.crossbar.n_cols) {
        throw ConfigError("analysis.column: outside the array", "analysis.column");
    }
    if (!(a.settle_rel > 0.0 && a.settle_rel < 1.0)) {
        throw ConfigError("analysis.settle_rel: must lie in (0, 1)", "analysis.settle_rel");
    }
    if (a.energy_window && !(*a.energy_window > 0.0)) {
        throw ConfigError("analysis.energy_window: must be positive", "analysis.energy_window");
    }
    if (!(a.max_time > 0.0)) {
        throw ConfigError("analysis.max_time: must be positive", "analysis.max_time");
    }
    if (!(a.steps_per_tau >= 1.0)) {
        throw ConfigError("analysis.steps_per_tau: must be >= 1", "analysis.steps_per_tau");
    }
    check_invariant("analysis.sweep", [&] {
        parse_sweep_parameter(a.sweep.parameter);
        for (const auto& m : a.sweep.metrics) {
            parse_metric(m);
        }
        for (double v : a.sweep.values) {
            if (!(v > 0.0)) {
                throw InvalidInput("sweep values must be positive");
            }
        }
    });
    check_invariant("analysis.monte_carlo", [&] {
        parse_observable(a.monte_carlo.observable);
        if (a.monte_carlo.samples < 1) {
            throw InvalidInput("samples must be >= 1");
        }
        if (a.monte_carlo.g_rel_std < 0.0 || a.monte_carlo.neuron_rel_std < 0.0) {
            throw InvalidInput("standard deviations must be >= 0");
        }
        if (a.monte_carlo.ramp_points < 4) {
            throw InvalidInput("ramp_points must be >= 4");
        }
    });
}

}  // namespace

// ---------------------------------------------------------------------------
// RunConfig materialization
// ---------------------------------------------------------------------------

MemristorDevice RunConfig::make_device() const {
    return MemristorDevice(device.g_off, device.g_on, device.v_th, device.k_mob);
}

CrossbarConfig RunConfig::make_crossbar() const {
    CrossbarConfig out;
    const auto rows = static_cast<Eigen::Index>(crossbar.n_rows);
    const auto cols = static_cast<Eigen::Index>(crossbar.n_cols);
    const auto& c = crossbar.conductance;
    switch (c.kind) {
    case ConductanceKind::Uniform:
        out.g = Eigen::MatrixXd::Constant(rows, cols, c.value);
        break;
    case ConductanceKind::Matrix:
        out.g.resize(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index j = 0; j < cols; ++j) {
                out.g(i, j) = c.matrix.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(j));
            }
        }
        break;
    case ConductanceKind::Random: {
        std::mt19937_64 rng(c.seed);
        std::uniform_real_distribution<double> dist(c.min, c.max);
        out.g.resize(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index j = 0; j < cols; ++j) {
                out.g(i, j) = c.min == c.max ? c.min : dist(rng);
            }
        }
        break;
    }
    }
    if (crossbar.normalize_rows) {
        out.g = normalize_row_conductances(out.g, crossbar.normalize_rows->target,
                                           crossbar.normalize_rows->free_column, make_device());
    }
    out.parasitics = parasitics;
    out.mode = mode;
    out.r_s = crossbar.source_resistance;
    return out;
}

std::vector<double> RunConfig::make_drive() const {
    switch (drive.kind) {
    case DriveKind::Uniform:
        return std::vector<double>(crossbar.n_rows, drive.value);
    case DriveKind::Values:
        return drive.values;
    case DriveKind::Random: {
        std::mt19937_64 rng(drive.seed);
        std::uniform_real_distribution<double> dist(drive.min, drive.max);
        std::vector<double> out(crossbar.n_rows);
        for (auto& v : out) {
            v = drive.min == drive.max ? drive.min : dist(rng);
        }
        return out;
    }
    }
    return {};
}

SigmoidParams RunConfig::neuron_params() const {
    return neuron.preset ? find_preset(*neuron.preset).params : neuron.inline_params;
}

SweepSpec RunConfig::make_sweep() const {
    SweepSpec spec;
    spec.parameter = parse_sweep_parameter(analysis.sweep.parameter);
    spec.values = analysis.sweep.values;
    for (const auto& m : analysis.sweep.metrics) {
        spec.metrics.push_back(parse_metric(m));
    }
    spec.column = analysis.column;
    spec.energy = energy_options();
    return spec;
}

McSpec RunConfig::make_monte_carlo() const {
    McSpec spec;
    const auto& mc = analysis.monte_carlo;
    spec.g_rel_std = mc.g_rel_std;
    spec.neuron_rel_std = mc.neuron_rel_std;
    spec.samples = mc.samples;
    spec.seed = analysis.seed;
    spec.observable = parse_observable(mc.observable);
    spec.neuron = neuron_params();
    spec.column = analysis.column;
    spec.ramp_points = mc.ramp_points;
    return spec;
}

EnergyOptions RunConfig::energy_options() const {
    EnergyOptions opts;
    opts.settle_rel = analysis.settle_rel;
    opts.fixed_window = analysis.energy_window;
    opts.max_time = analysis.max_time;
    opts.steps_per_tau = analysis.steps_per_tau;
    return opts;
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

Override parse_override(std::string_view text) {
    const auto eq = text.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw ConfigError("override '" + std::string(text) + "' must look like key.path=value",
                          std::string(text));
    }
    return {std::string(text.substr(0, eq)), std::string(text.substr(eq + 1))};
}

RunConfig parse_config(std::string_view text, std::string_view source,
                       const std::vector<Override>& overrides) {
    YAML::Node root = parse_document(text, source);
    if (!root.IsMap()) {
        throw ConfigError(std::string(source) + ": top level must be a mapping", "");
    }
    apply_overrides(root, overrides);
    RunConfig cfg = build(root);
    validate(cfg);
    return cfg;
}

RunConfig load_config(const std::string& path, const std::vector<Override>& overrides) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'", "");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path, overrides);
}

RunConfig default_config(const std::vector<Override>& overrides) {
    return parse_config("{}", "<defaults>", overrides);
}

nlohmann::ordered_json to_json(const RunConfig& cfg) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["device"] = {{"g_off", cfg.device.g_off},
                   {"g_on", cfg.device.g_on},
                   {"v_th", cfg.device.v_th},
                   {"k_mob", cfg.device.k_mob}};

    const auto& c = cfg.crossbar.conductance;
    ordered_json cond;
    switch (c.kind) {
    case ConductanceKind::Uniform:
        cond = {{"kind", "uniform"}, {"value", c.value}};
        break;
    case ConductanceKind::Matrix:
        cond = {{"kind", "matrix"}, {"matrix", c.matrix}};
        break;
    case ConductanceKind::Random:
        cond = {{"kind", "random"}, {"min", c.min}, {"max", c.max}, {"seed", c.seed}};
        break;
    }
    ordered_json xb = {{"n_rows", cfg.crossbar.n_rows},
                       {"n_cols", cfg.crossbar.n_cols},
                       {"conductance", cond},
                       {"source_resistance", cfg.crossbar.source_resistance}};
    if (cfg.crossbar.normalize_rows) {
        xb["normalize_rows"] = {{"target", cfg.crossbar.normalize_rows->target},
                                {"free_column", cfg.crossbar.normalize_rows->free_column}};
    }
    j["crossbar"] = xb;
    j["mode"] = std::string(to_string(cfg.mode));

    switch (cfg.drive.kind) {
    case DriveKind::Uniform:
        j["drive"] = {{"kind", "uniform"}, {"value", cfg.drive.value}};
        break;
    case DriveKind::Values:
        j["drive"] = {{"kind", "values"}, {"values", cfg.drive.values}};
        break;
    case DriveKind::Random:
        j["drive"] = {{"kind", "random"},
                      {"min", cfg.drive.min},
                      {"max", cfg.drive.max},
                      {"seed", cfg.drive.seed}};
        break;
    }

    j["parasitics"] = {{"r_p", cfg.parasitics.r_p},
                       {"c_p", cfg.parasitics.c_p},
                       {"r_t", cfg.parasitics.r_t}};

    if (cfg.neuron.preset) {
        j["neuron"] = {{"preset", *cfg.neuron.preset}};
    } else {
        const auto& p = cfg.neuron.inline_params;
        j["neuron"] = {{"a", p.a},
                       {"b", p.b},
                       {"c", p.c},
                       {"unit", std::string(to_string(p.output_unit))}};
    }

    const auto& a = cfg.analysis;
    ordered_json an = {{"seed", a.seed},
                       {"column", a.column},
                       {"settle_rel", a.settle_rel}};
    an["energy_window"] = a.energy_window ? ordered_json(*a.energy_window) : ordered_json(nullptr);
    an["max_time"] = a.max_time;
    an["steps_per_tau"] = a.steps_per_tau;
    an["sweep"] = {{"parameter", a.sweep.parameter},
                   {"values", a.sweep.values},
                   {"metrics", a.sweep.metrics}};
    an["monte_carlo"] = {{"samples", a.monte_carlo.samples},
                         {"g_rel_std", a.monte_carlo.g_rel_std},
                         {"neuron_rel_std", a.monte_carlo.neuron_rel_std},
                         {"observable", a.monte_carlo.observable},
                         {"ramp_points", a.monte_carlo.ramp_points}};
    an["fit_input"] = a.fit_input;
    an["currents"] = a.currents;
    j["analysis"] = an;

    j["output"] = {{"path", cfg.output.path},
                   {"format", cfg.output.format == OutputFormat::Csv ? "csv" : "json"}};
    return j;
}

std::string extract_embedded_config(const std::string& result_path) {
    std::ifstream in(result_path);
    if (!in) {
        throw InvalidInput("cannot open result file '" + result_path + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        const auto doc = nlohmann::json::parse(text, nullptr, false);
        if (doc.is_discarded() || !doc.contains("config")) {
            throw InvalidInput("'" + result_path + "' has no embedded config");
        }
        return doc["config"].dump();
    }
    std::istringstream lines(text);
    constexpr std::string_view kPrefix = "# config: ";
    for (std::string line; std::getline(lines, line);) {
        if (line.rfind(kPrefix, 0) == 0) {
            return line.substr(kPrefix.size());
        }
    }
    throw InvalidInput("'" + result_path + "' has no embedded config");
}

}  // namespace xbarsim::cli
