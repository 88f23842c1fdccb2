#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "degenlab/lab.hpp"

namespace degenlab {

namespace {

class Reader {
public:
    explicit Reader(std::string origin) : origin_(std::move(origin)) {}

    [[noreturn]] void fail(const YAML::Node& node, const std::string& key, const std::string& message) const {
        std::ostringstream os;
        os << origin_;
        const YAML::Mark mark = node.Mark();
        if (!mark.is_null()) os << ":" << mark.line + 1 << ":" << mark.column + 1;
        os << ": " << key << ": " << message;
        throw ConfigError(os.str());
    }

    void require_map(const YAML::Node& node, const std::string& key) const {
        if (!node.IsMap()) fail(node, key, "expected a mapping");
    }

    void only_keys(const YAML::Node& node, const std::string& key, const std::set<std::string>& allowed) const {
        for (const auto& kv : node) {
            const std::string name = kv.first.as<std::string>();
            if (!allowed.count(name)) fail(kv.first, key.empty() ? name : key + "." + name, "unknown key");
        }
    }

    template <class T>
    T scalar(const YAML::Node& node, const std::string& key, const char* type) const {
        if (!node.IsScalar()) fail(node, key, std::string("expected ") + type);
        try {
            return node.as<T>();
        } catch (const YAML::Exception&) {
            fail(node, key, std::string("expected ") + type);
        }
    }

    double number(const YAML::Node& node, const std::string& key) const {
        if (node.IsScalar()) {
            const std::string s = node.Scalar();
            if (s == "inf" || s == ".inf") return std::numeric_limits<double>::infinity();
        }
        const double v = scalar<double>(node, key, "a number");
        if (std::isnan(v)) fail(node, key, "NaN is not allowed");
        return v;
    }

    std::vector<double> numbers(const YAML::Node& node, const std::string& key) const {
        if (!node.IsSequence()) fail(node, key, "expected a list of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < node.size(); ++i) out.push_back(number(node[i], key + "[" + std::to_string(i) + "]"));
        return out;
    }

    std::vector<int> integers(const YAML::Node& node, const std::string& key) const {
        std::vector<int> out;
        if (node.IsScalar()) {
            out.push_back(scalar<int>(node, key, "an integer"));
            return out;
        }
        if (!node.IsSequence()) fail(node, key, "expected an integer or a list of integers");
        for (std::size_t i = 0; i < node.size(); ++i)
            out.push_back(scalar<int>(node[i], key + "[" + std::to_string(i) + "]", "an integer"));
        return out;
    }

    /// A list of times or a {start, stop, step} range.
    std::vector<double> times(const YAML::Node& node, const std::string& key) const {
        if (node.IsSequence()) return numbers(node, key);
        if (!node.IsMap()) fail(node, key, "expected a list of times or a {start, stop, step} range");
        only_keys(node, key, {"start", "stop", "step"});
        for (const char* k : {"start", "stop", "step"})
            if (!node[k]) fail(node, key, std::string("range needs '") + k + "'");
        const double start = number(node["start"], key + ".start");
        const double stop = number(node["stop"], key + ".stop");
        const double step = number(node["step"], key + ".step");
        if (!(step > 0.0) || !(stop >= start)) fail(node, key, "range needs step > 0 and stop >= start");
        const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
        if (count > 100000) fail(node, key, "range has too many points");
        std::vector<double> out;
        for (long k = 0; k <= count; ++k) out.push_back(start + static_cast<double>(k) * step);
        return out;
    }

    std::string text(const YAML::Node& node, const std::string& key) const {
        return scalar<std::string>(node, key, "a string");
    }

private:
    std::string origin_;
};

FieldSpec read_field(const Reader& r, const YAML::Node& node, const std::string& key) {
    r.require_map(node, key);
    r.only_keys(node, key, {"name", "kind", "domain", "value", "delta", "scale", "mean", "amplitude", "frequency",
                            "phase", "x_breaks", "y_breaks", "values", "table_nx", "table_ny"});
    FieldSpec f;
    if (!node["kind"]) r.fail(node, key + ".kind", "missing");
    f.kind = r.text(node["kind"], key + ".kind");
    static const std::set<std::string> kinds{"constant", "degenerate", "sinusoid", "piecewise", "tabulated"};
    if (!kinds.count(f.kind)) r.fail(node["kind"], key + ".kind", "unknown field kind '" + f.kind + "'");
    if (!node["domain"]) r.fail(node, key + ".domain", "missing");
    f.domain = r.numbers(node["domain"], key + ".domain");
    if (f.domain.size() != 2 && f.domain.size() != 4)
        r.fail(node["domain"], key + ".domain", "expected [a, b] or [x0, x1, y0, y1]");
    f.name = node["name"] ? r.text(node["name"], key + ".name") : f.kind;
    auto num = [&](const char* k, double& out) {
        if (node[k]) out = r.number(node[k], key + "." + k);
    };
    num("value", f.value);
    num("delta", f.delta);
    num("scale", f.scale);
    num("mean", f.mean);
    num("amplitude", f.amplitude);
    num("frequency", f.frequency);
    num("phase", f.phase);
    if (node["x_breaks"]) f.x_breaks = r.numbers(node["x_breaks"], key + ".x_breaks");
    if (node["y_breaks"]) f.y_breaks = r.numbers(node["y_breaks"], key + ".y_breaks");
    if (node["values"]) f.values = r.numbers(node["values"], key + ".values");
    if (node["table_nx"]) f.table_nx = r.scalar<int>(node["table_nx"], key + ".table_nx", "an integer");
    if (node["table_ny"]) f.table_ny = r.scalar<int>(node["table_ny"], key + ".table_ny", "an integer");
    try {
        (void)f.build();
    } catch (const std::exception& e) {
        r.fail(node, key, e.what());
    }
    return f;
}

AuditSpec read_audit(const Reader& r, const YAML::Node& node, const std::string& key) {
    r.require_map(node, key);
    r.only_keys(node, key, {"kind", "sets", "times", "mode", "samples", "amplitude", "lambda", "eps", "sizes",
                            "observable", "t", "expect", "tolerance_cells", "at_most_cells", "finite", "target",
                            "min_order", "below", "max_relative_change"});
    AuditSpec a;
    if (!node["kind"]) r.fail(node, key + ".kind", "missing");
    a.kind = r.text(node["kind"], key + ".kind");
    static const std::set<std::string> kinds{"distance", "gaussian", "rho", "separation", "wave", "twist",
                                             "multiplier", "viscosity", "refinement", "boundary_ordering"};
    if (!kinds.count(a.kind)) r.fail(node["kind"], key + ".kind", "unknown audit kind '" + a.kind + "'");
    if (node["sets"]) {
        const YAML::Node s = node["sets"];
        if (s.IsScalar()) {
            a.sets.push_back(r.text(s, key + ".sets"));
        } else if (s.IsSequence()) {
            for (std::size_t i = 0; i < s.size(); ++i) a.sets.push_back(r.text(s[i], key + ".sets"));
        } else {
            r.fail(s, key + ".sets", "expected a set name or a list of names");
        }
    }
    if (node["times"]) a.times = r.times(node["times"], key + ".times");
    if (node["mode"]) a.mode = r.text(node["mode"], key + ".mode");
    if (node["samples"]) a.samples = r.scalar<int>(node["samples"], key + ".samples", "an integer");
    if (node["amplitude"]) a.amplitude = r.number(node["amplitude"], key + ".amplitude");
    if (node["lambda"]) a.lambda = r.number(node["lambda"], key + ".lambda");
    if (node["eps"]) a.eps = r.numbers(node["eps"], key + ".eps");
    if (node["sizes"]) a.sizes = r.integers(node["sizes"], key + ".sizes");
    if (node["observable"]) a.observable = r.text(node["observable"], key + ".observable");
    if (node["t"]) a.t = r.number(node["t"], key + ".t");
    if (node["expect"]) a.expect = r.number(node["expect"], key + ".expect");
    if (node["tolerance_cells"]) a.tolerance_cells = r.number(node["tolerance_cells"], key + ".tolerance_cells");
    if (node["at_most_cells"]) a.at_most_cells = r.number(node["at_most_cells"], key + ".at_most_cells");
    if (node["finite"]) a.finite = r.scalar<bool>(node["finite"], key + ".finite", "true or false");
    if (node["target"]) a.target = r.number(node["target"], key + ".target");
    if (node["min_order"]) a.min_order = r.number(node["min_order"], key + ".min_order");
    if (node["below"]) a.below = r.number(node["below"], key + ".below");
    if (node["max_relative_change"])
        a.max_relative_change = r.number(node["max_relative_change"], key + ".max_relative_change");

    auto need_sets = [&](std::size_t n) {
        if (a.sets.size() != n)
            r.fail(node, key + ".sets", "audit '" + a.kind + "' needs " + std::to_string(n) + " set name(s)");
    };
    if (a.kind == "separation") need_sets(1);
    if (a.kind == "distance" || a.kind == "gaussian" || a.kind == "rho" || a.kind == "wave" ||
        a.kind == "boundary_ordering")
        need_sets(2);
    if (a.kind == "distance") {
        try {
            (void)distance_mode_from_string(a.mode);
        } catch (const ParameterError& e) {
            r.fail(node["mode"] ? node["mode"] : node, key + ".mode", e.what());
        }
    }
    if (a.kind != "wave")
        for (double t : a.times)
            if (!(t > 0.0) || !std::isfinite(t)) r.fail(node["times"], key + ".times", "times must be positive");
    if (a.kind == "rho" && !(a.t > 0.0)) r.fail(node, key + ".t", "must be positive");
    if ((a.kind == "twist" || a.kind == "multiplier") && a.samples < 1)
        r.fail(node, key + ".samples", "must be at least 1");
    if (a.kind == "viscosity") {
        if (a.eps.empty()) r.fail(node, key + ".eps", "viscosity audit needs an eps sequence");
        if (!(a.lambda > 0.0)) r.fail(node, key + ".lambda", "must be positive");
    }
    if (a.kind == "refinement") {
        static const std::set<std::string> obs{"leakage", "distance", "riemannian"};
        if (!obs.count(a.observable))
            r.fail(node, key + ".observable", "expected one of leakage, distance, riemannian");
        if (a.sizes.size() < 3) r.fail(node, key + ".sizes", "need at least three sizes");
        for (std::size_t k = 1; k < a.sizes.size(); ++k)
            if (a.sizes[k] != 2 * a.sizes[k - 1]) r.fail(node["sizes"], key + ".sizes", "sizes must double each step");
        need_sets(a.observable == "leakage" ? 1 : 2);
    }
    return a;
}

bool part_inside(const std::vector<double>& part, const Box& box) {
    const double sx = 1e-12 * std::max(1.0, box.hi[0] - box.lo[0]);
    if (part[0] < box.lo[0] - sx || part[1] > box.hi[0] + sx) return false;
    if (box.dim == 2) {
        const double sy = 1e-12 * std::max(1.0, box.hi[1] - box.lo[1]);
        if (part[2] < box.lo[1] - sy || part[3] > box.hi[1] + sy) return false;
    }
    return true;
}

}  // namespace

Box FieldSpec::box() const {
    if (domain.size() == 2) return Box::interval(domain[0], domain[1]);
    if (domain.size() == 4) return Box::rectangle(domain[0], domain[1], domain[2], domain[3]);
    throw ParameterError("field domain must have 2 or 4 numbers");
}

CoefficientField FieldSpec::build() const {
    const Box b = box();
    CoefficientField f = [&] {
        if (kind == "constant") return CoefficientField::constant(value, b);
        if (kind == "degenerate") return CoefficientField::degenerate(delta, b, scale);
        if (kind == "sinusoid") return CoefficientField::sinusoid(mean, amplitude, frequency, phase, b);
        if (kind == "piecewise") return CoefficientField::piecewise(x_breaks, y_breaks, values, b);
        if (kind == "tabulated") return CoefficientField::tabulated(values, table_nx, table_ny, b);
        throw ParameterError("unknown field kind '" + kind + "'");
    }();
    return f;
}

Region SetSpec::region() const {
    Region r;
    for (const auto& p : parts) {
        if (p.size() == 2) {
            r.parts.push_back(Box::interval(p[0], p[1]));
        } else {
            r.parts.push_back(Box::rectangle(p[0], p[1], p[2], p[3]));
        }
    }
    return r;
}

int ExperimentConfig::dim() const { return fields.empty() ? 1 : fields.front().box().dim; }

const SetSpec& ExperimentConfig::set(const std::string& name) const {
    for (const SetSpec& s : sets)
        if (s.name == name) return s;
    throw ConfigError("unknown set '" + name + "'");
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
    const Reader r(origin);
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        std::ostringstream os;
        os << origin << ":" << e.mark.line + 1 << ":" << e.mark.column + 1 << ": syntax: " << e.msg;
        throw ConfigError(os.str());
    }
    if (!root.IsMap()) r.fail(root, "config", "expected a mapping at the top level");
    r.only_keys(root, "", {"scenario", "description", "seed", "jobs", "output", "field", "fields", "grid", "boundary",
                           "eps", "sets", "times", "wave_constant", "audits", "schema_version"});
    ExperimentConfig c;
    if (!root["scenario"]) r.fail(root, "scenario", "missing");
    c.scenario = r.text(root["scenario"], "scenario");
    if (root["description"]) c.description = r.text(root["description"], "description");
    if (root["seed"]) c.seed = r.scalar<std::uint64_t>(root["seed"], "seed", "a non-negative integer");
    if (root["jobs"]) {
        c.jobs = r.scalar<int>(root["jobs"], "jobs", "an integer");
        if (c.jobs < 0) r.fail(root["jobs"], "jobs", "must be >= 0");
    }
    if (root["output"]) c.output = r.text(root["output"], "output");

    if (root["field"] && root["fields"]) r.fail(root, "fields", "give either 'field' or 'fields'");
    if (root["field"]) {
        c.fields.push_back(read_field(r, root["field"], "field"));
    } else if (root["fields"]) {
        const YAML::Node fs = root["fields"];
        if (!fs.IsSequence() || fs.size() == 0) r.fail(fs, "fields", "expected a non-empty list");
        for (std::size_t i = 0; i < fs.size(); ++i)
            c.fields.push_back(read_field(r, fs[i], "fields[" + std::to_string(i) + "]"));
    } else {
        r.fail(root, "field", "missing");
    }
    std::set<std::string> field_names;
    for (std::size_t i = 0; i < c.fields.size(); ++i) {
        if (!field_names.insert(c.fields[i].name).second)
            r.fail(root["fields"], "fields[" + std::to_string(i) + "].name", "duplicate field name");
        if (c.fields[i].box().dim != c.fields.front().box().dim)
            r.fail(root["fields"], "fields", "all fields must share a dimension");
    }

    if (!root["grid"]) r.fail(root, "grid", "missing");
    {
        const YAML::Node g = root["grid"];
        r.require_map(g, "grid");
        r.only_keys(g, "grid", {"n", "ny"});
        if (!g["n"]) r.fail(g, "grid.n", "missing");
        c.sizes = r.integers(g["n"], "grid.n");
        if (c.sizes.empty()) r.fail(g["n"], "grid.n", "need at least one size");
        for (int n : c.sizes)
            if (n < 2) r.fail(g["n"], "grid.n", "sizes must be at least 2");
        if (g["ny"]) {
            c.ny = r.scalar<int>(g["ny"], "grid.ny", "an integer");
            if (*c.ny < 2) r.fail(g["ny"], "grid.ny", "must be at least 2");
            if (c.dim() != 2) r.fail(g["ny"], "grid.ny", "only meaningful for 2D fields");
        }
    }
    if (root["boundary"]) {
        try {
            c.boundary = boundary_from_string(r.text(root["boundary"], "boundary"));
        } catch (const std::exception& e) {
            r.fail(root["boundary"], "boundary", e.what());
        }
    }
    if (root["eps"]) {
        c.eps = r.numbers(root["eps"], "eps");
        if (c.eps.empty()) r.fail(root["eps"], "eps", "need at least one value");
        for (double e : c.eps)
            if (!(e >= 0.0) || !std::isfinite(e)) r.fail(root["eps"], "eps", "values must be finite and >= 0");
    }
    if (root["sets"]) {
        const YAML::Node s = root["sets"];
        r.require_map(s, "sets");
        for (const auto& kv : s) {
            SetSpec set;
            set.name = kv.first.as<std::string>();
            const std::string key = "sets." + set.name;
            if (!kv.second.IsSequence() || kv.second.size() == 0)
                r.fail(kv.second, key, "expected a non-empty list of intervals or boxes");
            for (std::size_t i = 0; i < kv.second.size(); ++i) {
                const std::string pk = key + "[" + std::to_string(i) + "]";
                std::vector<double> part = r.numbers(kv.second[i], pk);
                const std::size_t want = c.dim() == 1 ? 2 : 4;
                if (part.size() != want)
                    r.fail(kv.second[i], pk, c.dim() == 1 ? "expected [a, b]" : "expected [x0, x1, y0, y1]");
                if (part[0] > part[1] || (want == 4 && part[2] > part[3]))
                    r.fail(kv.second[i], pk, "empty interval");
                for (const FieldSpec& f : c.fields)
                    if (!part_inside(part, f.box())) r.fail(kv.second[i], pk, "lies outside the domain of field '" + f.name + "'");
                set.parts.push_back(std::move(part));
            }
            c.sets.push_back(std::move(set));
        }
    }
    if (root["times"]) {
        c.times = r.times(root["times"], "times");
        for (double t : c.times)
            if (!(t > 0.0) || !std::isfinite(t)) r.fail(root["times"], "times", "times must be strictly positive");
    }
    if (root["wave_constant"]) {
        c.wave_constant = r.number(root["wave_constant"], "wave_constant");
        if (!(c.wave_constant >= 0.0)) r.fail(root["wave_constant"], "wave_constant", "must be >= 0");
    }
    if (root["audits"]) {
        const YAML::Node as = root["audits"];
        if (!as.IsSequence()) r.fail(as, "audits", "expected a list");
        for (std::size_t i = 0; i < as.size(); ++i) {
            const std::string key = "audits[" + std::to_string(i) + "]";
            AuditSpec a = read_audit(r, as[i], key);
            for (const std::string& name : a.sets) {
                bool found = false;
                for (const SetSpec& s : c.sets) found = found || s.name == name;
                if (!found) r.fail(as[i], key + ".sets", "unknown set '" + name + "'");
            }
            if ((a.kind == "gaussian" || a.kind == "twist") && a.times.empty() && c.times.empty())
                r.fail(as[i], key + ".times", "no times given here or at the top level");
            c.audits.push_back(std::move(a));
        }
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open config");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

ExperimentConfig apply_overrides(ExperimentConfig config, const RunOptions& options) {
    if (options.grid_override) {
        if (*options.grid_override < 2) throw ConfigError("--grid-override: size must be at least 2");
        config.sizes = {*options.grid_override};
        if (config.ny) config.ny = *options.grid_override;
    }
    if (options.jobs) {
        if (*options.jobs < 0) throw ConfigError("--jobs: must be >= 0");
        config.jobs = *options.jobs;
    }
    if (options.seed) config.seed = *options.seed;
    if (options.output) config.output = *options.output;
    return config;
}

std::string config_echo(const ExperimentConfig& c) {
    using nlohmann::ordered_json;
    auto num = [](double v) -> ordered_json {
        if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
        return v;
    };
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["scenario"] = c.scenario;
    j["description"] = c.description;
    j["seed"] = c.seed;
    j["jobs"] = c.jobs;
    if (!c.output.empty()) j["output"] = c.output;
    ordered_json fields = ordered_json::array();
    for (const FieldSpec& f : c.fields) {
        ordered_json o;
        o["name"] = f.name;
        o["kind"] = f.kind;
        o["domain"] = f.domain;
        if (f.kind == "constant") o["value"] = f.value;
        if (f.kind == "degenerate") {
            o["delta"] = f.delta;
            o["scale"] = f.scale;
        }
        if (f.kind == "sinusoid") {
            o["mean"] = f.mean;
            o["amplitude"] = f.amplitude;
            o["frequency"] = f.frequency;
            o["phase"] = f.phase;
        }
        if (f.kind == "piecewise") {
            o["x_breaks"] = f.x_breaks;
            o["y_breaks"] = f.y_breaks;
            o["values"] = f.values;
        }
        if (f.kind == "tabulated") {
            o["values"] = f.values;
            o["table_nx"] = f.table_nx;
            o["table_ny"] = f.table_ny;
        }
        fields.push_back(std::move(o));
    }
    j["fields"] = std::move(fields);
    j["grid"]["n"] = c.sizes;
    if (c.ny) j["grid"]["ny"] = *c.ny;
    j["boundary"] = to_string(c.boundary);
    j["eps"] = c.eps;
    j["sets"] = ordered_json::object();
    for (const SetSpec& s : c.sets) j["sets"][s.name] = s.parts;
    if (!c.times.empty()) j["times"] = c.times;
    j["wave_constant"] = c.wave_constant;
    ordered_json audits = ordered_json::array();
    for (const AuditSpec& a : c.audits) {
        ordered_json o;
        o["kind"] = a.kind;
        if (!a.sets.empty()) o["sets"] = a.sets;
        if (!a.times.empty()) o["times"] = a.times;
        o["mode"] = a.mode;
        o["samples"] = a.samples;
        o["amplitude"] = a.amplitude;
        o["lambda"] = a.lambda;
        if (!a.eps.empty()) o["eps"] = a.eps;
        if (!a.sizes.empty()) o["sizes"] = a.sizes;
        if (!a.observable.empty()) o["observable"] = a.observable;
        o["t"] = a.t;
        if (a.expect) o["expect"] = num(*a.expect);
        o["tolerance_cells"] = a.tolerance_cells;
        if (a.at_most_cells) o["at_most_cells"] = num(*a.at_most_cells);
        if (a.finite) o["finite"] = *a.finite;
        if (a.target) o["target"] = num(*a.target);
        if (a.min_order) o["min_order"] = num(*a.min_order);
        if (a.below) o["below"] = num(*a.below);
        if (a.max_relative_change) o["max_relative_change"] = num(*a.max_relative_change);
        audits.push_back(std::move(o));
    }
    j["audits"] = std::move(audits);
    return j.dump(2);
}

}  // namespace degenlab
