#include "renorm/cli/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "renorm/errors.hpp"
#include "renorm/numerics/scalar.hpp"

namespace renorm::cli {

namespace {

const char* const kind_names[] = {"convergence", "martingale", "denjoy", "combinatorics", "diagnostics"};

const char* const family_names[] = {"standard", "affine", "mobius", "ko", "ko-zero-mean"};

[[noreturn]] void fail(const std::string& field, const std::string& what) {
    throw ConfigError(field + ": " + what);
}

/// Reals must arrive as strings so that nothing passes through a double.
std::string real_text(const json& j, const std::string& field) {
    if (!j.is_string()) fail(field, "real values must be written as strings, e.g. \"0.25\" or \"1/4\"");
    const auto text = j.get<std::string>();
    const auto slash = text.find('/');
    auto check = [&](const std::string& part) {
        if (part.empty()) fail(field, "'" + text + "' is not a number");
        char* end = nullptr;
        errno = 0;
        std::strtold(part.c_str(), &end);
        if (end != part.c_str() + part.size()) fail(field, "'" + text + "' is not a number");
    };
    if (slash == std::string::npos) {
        check(text);
    } else {
        check(text.substr(0, slash));
        check(text.substr(slash + 1));
    }
    return text;
}

std::vector<std::string> real_list(const json& j, const std::string& field) {
    if (!j.is_array()) fail(field, "expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(real_text(j[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<std::string> name_list(const json& j, const std::string& field) {
    if (!j.is_array()) fail(field, "expected an array of letter names");
    std::vector<std::string> out;
    for (const auto& v : j) {
        if (!v.is_string()) fail(field, "letter names must be strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

std::size_t count(const json& j, const std::string& field) {
    if (!j.is_number_integer() || j.get<long long>() < 0) fail(field, "expected a non-negative integer");
    return j.get<std::size_t>();
}

bool flag(const json& j, const std::string& field) {
    if (!j.is_boolean()) fail(field, "expected true or false");
    return j.get<bool>();
}

long double positive_ld(const json& j, const std::string& field) {
    const auto text = real_text(j, field);
    const long double v = std::strtold(text.c_str(), nullptr);
    if (!(v > 0)) fail(field, "must be positive");
    return v;
}

void reject_unknown(const json& j, const std::vector<std::string>& known, const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        bool found = false;
        for (const auto& k : known) found = found || k == key;
        if (!found) fail(where.empty() ? key : where + "." + key, "unknown field");
    }
}

FamilySpec parse_family(const json& j) {
    if (!j.is_object()) fail("family", "expected an object");
    reject_unknown(j, {"name", "lengths", "top", "bottom", "slopes", "coefficients", "image_widths", "params", "tune"},
                   "family");
    FamilySpec f;
    if (!j.contains("name") || !j["name"].is_string()) fail("family.name", "required string");
    f.name = j["name"].get<std::string>();
    bool known = false;
    for (const auto* n : family_names) known = known || f.name == n;
    if (!known) fail("family.name", "unknown family '" + f.name + "'");

    f.top = j.contains("top") ? name_list(j["top"], "family.top") : std::vector<std::string>{"A", "B"};
    f.bottom = j.contains("bottom") ? name_list(j["bottom"], "family.bottom") : std::vector<std::string>{"B", "A"};
    if (f.top.size() != f.bottom.size() || f.top.size() < 2) fail("family.bottom", "top and bottom must list the same letters");

    const json lengths = j.value("lengths", json("golden"));
    if (lengths.is_string() && (lengths == "golden" || lengths == "golden-tuned")) {
        f.lengths = {lengths.get<std::string>()};
        if (f.top.size() != 2) fail("family.lengths", "'" + f.lengths[0] + "' needs two letters");
        if (f.golden_tuned() && f.name != "ko-zero-mean")
            fail("family.lengths", "'golden-tuned' is only available for ko-zero-mean");
    } else {
        f.lengths = real_list(lengths, "family.lengths");
        if (f.lengths.size() != f.top.size()) fail("family.lengths", "one length per letter");
    }

    if (j.contains("slopes")) f.slopes = real_list(j["slopes"], "family.slopes");
    if (j.contains("coefficients")) f.coefficients = real_list(j["coefficients"], "family.coefficients");
    if (j.contains("image_widths")) f.image_widths = real_list(j["image_widths"], "family.image_widths");
    if (j.contains("params")) {
        const auto& p = j["params"];
        if (!p.is_array()) fail("family.params", "expected an array of {amplitude, center, bend}");
        for (std::size_t i = 0; i < p.size(); ++i) {
            const std::string at = "family.params[" + std::to_string(i) + "]";
            if (!p[i].is_object()) fail(at, "expected an object");
            reject_unknown(p[i], {"amplitude", "center", "bend"}, at);
            for (const char* k : {"amplitude", "center", "bend"})
                if (!p[i].contains(k)) fail(at + "." + k, "required");
            f.ko.push_back({real_text(p[i]["amplitude"], at + ".amplitude"), real_text(p[i]["center"], at + ".center"),
                            real_text(p[i]["bend"], at + ".bend")});
        }
    }
    if (j.contains("tune")) {
        const auto& t = j["tune"];
        if (!t.is_object()) fail("family.tune", "expected an object");
        reject_unknown(t, {"bracket", "depth"}, "family.tune");
        if (t.contains("bracket")) {
            auto b = real_list(t["bracket"], "family.tune.bracket");
            if (b.size() != 2) fail("family.tune.bracket", "expected two values");
            f.tune_lo = b[0];
            f.tune_hi = b[1];
        }
        if (t.contains("depth")) f.tune_depth = count(t["depth"], "family.tune.depth");
    }

    if (f.name == "affine" && f.slopes.size() + 1 != f.top.size() && f.slopes.size() != f.top.size())
        fail("family.slopes", "give d - 1 or d slopes");
    if (f.name == "mobius" && f.coefficients.size() != f.top.size()) fail("family.coefficients", "one coefficient per letter");
    if ((f.name == "ko" || f.name == "ko-zero-mean") && !f.ko.empty() && f.ko.size() != 1 && f.ko.size() != f.top.size())
        fail("family.params", "give one parameter set or one per letter");
    return f;
}

}  // namespace

std::string to_string(ExperimentKind kind) { return kind_names[static_cast<int>(kind)]; }

ExperimentKind experiment_kind_from_string(const std::string& name) {
    for (int k = 0; k < 5; ++k)
        if (name == kind_names[k]) return static_cast<ExperimentKind>(k);
    throw ConfigError("experiment: unknown kind '" + name + "'");
}

std::string ExperimentConfig::scalar() const {
    if (precision.mode == ArithmeticMode::ExactRational) return "rational";
    return precision.float_bits == 64 ? "long double" : "mpfr";
}

int ExperimentConfig::digits() const { return num::serialization_digits(precision.float_bits); }

ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    reject_unknown(j, {"experiment", "family", "arithmetic", "depth", "first_depth", "grid_points", "quad_tol",
                       "max_panels", "seed", "output", "target", "samples", "tau_points", "sums", "record_runtime",
                       "tolerances"},
                   "");
    ExperimentConfig c;
    if (!j.contains("experiment") || !j["experiment"].is_string()) fail("experiment", "required string");
    c.kind = experiment_kind_from_string(j["experiment"].get<std::string>());
    if (!j.contains("family")) fail("family", "required");
    c.family = parse_family(j["family"]);

    if (j.contains("arithmetic")) {
        const auto& a = j["arithmetic"];
        if (!a.is_object()) fail("arithmetic", "expected an object");
        reject_unknown(a, {"mode", "float_bits"}, "arithmetic");
        if (a.contains("mode")) {
            if (!a["mode"].is_string()) fail("arithmetic.mode", "expected a string");
            try {
                c.precision.mode = arithmetic_mode_from_string(a["mode"].get<std::string>());
            } catch (const std::invalid_argument& e) {
                fail("arithmetic.mode", e.what());
            }
        }
        if (a.contains("float_bits")) c.precision.float_bits = static_cast<unsigned>(count(a["float_bits"], "arithmetic.float_bits"));
    }
    if (!j.contains("depth")) fail("depth", "required");
    c.depth = count(j["depth"], "depth");
    if (c.depth < 1) fail("depth", "must be at least 1");
    if (j.contains("first_depth")) c.first_depth = count(j["first_depth"], "first_depth");
    if (c.first_depth > c.depth) fail("first_depth", "must not exceed depth");
    if (j.contains("grid_points")) c.precision.grid_points = count(j["grid_points"], "grid_points");
    if (j.contains("quad_tol")) c.precision.quad_tol = positive_ld(j["quad_tol"], "quad_tol");
    if (j.contains("max_panels")) c.precision.max_panels = count(j["max_panels"], "max_panels");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0) fail("seed", "expected a non-negative integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("output")) {
        if (!j["output"].is_string()) fail("output", "expected a path string");
        c.output = j["output"].get<std::string>();
    }
    c.target = c.family.name == "ko-zero-mean" ? "identity" : "mobius";
    if (j.contains("target")) {
        if (j["target"] != "mobius" && j["target"] != "identity") fail("target", "expected \"mobius\" or \"identity\"");
        c.target = j["target"].get<std::string>();
    }
    if (j.contains("samples")) {
        const auto& s = j["samples"];
        if (!s.is_object()) fail("samples", "expected an object");
        reject_unknown(s, {"points", "pairs"}, "samples");
        if (s.contains("points")) c.points = count(s["points"], "samples.points");
        if (s.contains("pairs")) c.pairs = count(s["pairs"], "samples.pairs");
    }
    if (j.contains("tau_points")) c.tau_points = count(j["tau_points"], "tau_points");
    if (c.tau_points < 1) fail("tau_points", "must be at least 1");
    if (j.contains("sums")) c.sums = flag(j["sums"], "sums");
    if (j.contains("record_runtime")) c.record_runtime = flag(j["record_runtime"], "record_runtime");
    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        if (!t.is_object()) fail("tolerances", "expected an object");
        reject_unknown(t, {"tower", "increment"}, "tolerances");
        if (t.contains("tower")) c.tower_tol = positive_ld(t["tower"], "tolerances.tower");
        if (t.contains("increment")) c.increment_tol = positive_ld(t["increment"], "tolerances.increment");
    }
    try {
        c.precision.validate();
    } catch (const std::invalid_argument& e) {
        fail("arithmetic", e.what());
    }
    if (c.precision.mode == ArithmeticMode::ExactRational &&
        (c.kind == ExperimentKind::Denjoy || c.kind == ExperimentKind::Martingale || c.family.name == "ko" || c.family.name == "ko-zero-mean"))
        fail("arithmetic.mode", "this experiment needs extended arithmetic");
    return c;
}

json read_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, column = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ConfigError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(column) + ": syntax error");
    }
    return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(read_config(path)); }

json to_json(const ExperimentConfig& c) {
    json fam;
    const auto& f = c.family;
    fam["name"] = f.name;
    if (f.lengths.size() == 1 && (f.lengths[0] == "golden" || f.lengths[0] == "golden-tuned"))
        fam["lengths"] = f.lengths[0];
    else
        fam["lengths"] = f.lengths;
    fam["top"] = f.top;
    fam["bottom"] = f.bottom;
    if (!f.slopes.empty()) fam["slopes"] = f.slopes;
    if (!f.coefficients.empty()) fam["coefficients"] = f.coefficients;
    if (!f.image_widths.empty()) fam["image_widths"] = f.image_widths;
    if (!f.ko.empty()) {
        fam["params"] = json::array();
        for (const auto& p : f.ko) fam["params"].push_back({{"amplitude", p.amplitude}, {"center", p.center}, {"bend", p.bend}});
    }
    if (f.golden_tuned()) {
        fam["tune"] = {{"bracket", {f.tune_lo, f.tune_hi}}};
        if (f.tune_depth) fam["tune"]["depth"] = *f.tune_depth;
    }
    auto ld_text = [](long double v) {
        std::ostringstream os;
        os.precision(21);
        os << v;
        return os.str();
    };
    return json{{"experiment", to_string(c.kind)},
                {"family", fam},
                {"arithmetic", {{"mode", to_string(c.precision.mode)}, {"float_bits", c.precision.float_bits}}},
                {"depth", c.depth},
                {"first_depth", c.first_depth},
                {"grid_points", c.precision.grid_points},
                {"quad_tol", ld_text(c.precision.quad_tol)},
                {"max_panels", c.precision.max_panels},
                {"seed", c.seed},
                {"output", c.output.string()},
                {"target", c.target},
                {"samples", {{"points", c.points}, {"pairs", c.pairs}}},
                {"tau_points", c.tau_points},
                {"sums", c.sums},
                {"record_runtime", c.record_runtime},
                {"tolerances", {{"tower", ld_text(c.tower_tol)}, {"increment", ld_text(c.increment_tol)}}}};
}

}  // namespace renorm::cli
