#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <variant>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "mdm/critical.hpp"
#include "mdm/errors.hpp"
#include "mdm/gaussian.hpp"
#include "mdm/model.hpp"
#include "mdm/variational.hpp"

namespace mdm::cli {

using json = nlohmann::ordered_json;

const char* to_string(Command c) {
    switch (c) {
    case Command::Exact: return "exact";
    case Command::Pressure: return "pressure";
    case Command::Critical: return "critical";
    case Command::Branches: return "branches";
    case Command::Exponent: return "exponent";
    case Command::Scaled: return "scaled";
    case Command::Gauss: return "gauss";
    case Command::Convergence: return "convergence";
    }
    return "unknown";
}

namespace {

const std::vector<std::pair<std::string, Command>> kCommands{
    {"exact", Command::Exact},       {"pressure", Command::Pressure}, {"critical", Command::Critical},
    {"branches", Command::Branches}, {"exponent", Command::Exponent}, {"scaled", Command::Scaled},
    {"gauss", Command::Gauss},       {"convergence", Command::Convergence},
};

// key, help text
const std::vector<std::pair<std::string, std::string>> kSettings{
    {"alpha", "fraction of sites in population A"},
    {"h", "dimer fields h_A,h_B,h_AB"},
    {"J", "couplings, 9 values row-major (A,B,AB)"},
    {"h_ab", "mixed-dimer field h_AB (reduced model h)"},
    {"J_ab", "mixed coupling J_AB^AB (reduced model J)"},
    {"N", "system sizes: comma list or lo:hi:step"},
    {"offsets", "exponent scan offsets J - J_c, comma list"},
    {"alphas", "alpha grid for the scaled scan, comma list"},
    {"jprime", "scaled coupling J' (J = alpha(1-alpha)J')"},
    {"h_range", "branches h grid lo:hi:steps"},
    {"J_range", "branches J grid lo:hi:steps"},
    {"grid", "psi scan intervals per axis"},
    {"max_n", "enumeration cap"},
    {"method", "gauss method: quadrature or monte-carlo"},
    {"samples", "Monte Carlo sample count"},
    {"output", "output path (default stdout)"},
    {"format", "csv or json"},
    {"seed", "random seed"},
    {"deterministic", "fixed reduction order (true/false)"},
    {"threads", "worker threads for enumeration"},
};

double parse_double(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ValidationError("not a number: '" + s + "'");
    }
    if (used != s.size() || !std::isfinite(v)) throw ValidationError("not a finite number: '" + s + "'");
    return v;
}

long long parse_int(const std::string& s) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &used);
    } catch (const std::exception&) {
        throw ValidationError("not an integer: '" + s + "'");
    }
    if (used != s.size()) throw ValidationError("not an integer: '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) {
        const auto b = cur.find_first_not_of(" \t");
        const auto e = cur.find_last_not_of(" \t");
        parts.push_back(b == std::string::npos ? "" : cur.substr(b, e - b + 1));
    }
    return parts;
}

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    for (const auto& p : split(s, ',')) out.push_back(parse_double(p));
    if (out.empty()) throw ValidationError("empty list");
    return out;
}

std::vector<int> parse_sizes(const std::string& s) {
    std::vector<int> out;
    if (s.find(':') != std::string::npos) {
        const auto p = split(s, ':');
        if (p.size() != 3) throw ValidationError("size range must be lo:hi:step");
        const long long lo = parse_int(p[0]), hi = parse_int(p[1]), step = parse_int(p[2]);
        if (step <= 0 || hi < lo) throw ValidationError("size range needs lo <= hi and step > 0");
        for (long long n = lo; n <= hi; n += step) out.push_back(int(n));
    } else {
        for (const auto& p : split(s, ',')) out.push_back(int(parse_int(p)));
    }
    if (out.empty()) throw ValidationError("empty size list");
    return out;
}

Range parse_range(const std::string& s) {
    const auto p = split(s, ':');
    if (p.size() != 3) throw ValidationError("range must be lo:hi:steps");
    Range r{parse_double(p[0]), parse_double(p[1]), int(parse_int(p[2]))};
    if (r.steps < 1 || r.hi < r.lo) throw ValidationError("range needs lo <= hi and steps >= 1");
    return r;
}

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ValidationError("not a boolean: '" + s + "'");
}

// Tables --------------------------------------------------------------------

using Cell = std::variant<long long, double, std::string, bool>;

struct Column {
    std::string name;
    std::string unit;
};

struct Table {
    std::vector<Column> columns;
    std::vector<std::vector<Cell>> rows;
    json summary = json::object();
};

std::string format_cell(const Cell& c) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
                return fmt::format("{:.17g}", v);
            } else if constexpr (std::is_same_v<T, bool>) {
                return v ? "true" : "false";
            } else if constexpr (std::is_same_v<T, std::string>) {
                return v;
            } else {
                return std::to_string(v);
            }
        },
        c);
}

json cell_json(const Cell& c) {
    return std::visit([](const auto& v) { return json(v); }, c);
}

json range_json(const std::optional<Range>& r) {
    if (!r) return nullptr;
    return json{{"lo", r->lo}, {"hi", r->hi}, {"steps", r->steps}};
}

json config_json(const RunConfig& cfg) {
    json j;
    j["command"] = to_string(cfg.command);
    j["alpha"] = cfg.params.alpha;
    j["h"] = cfg.params.h;
    j["J"] = cfg.params.J;
    j["N"] = cfg.sizes;
    j["offsets"] = cfg.offsets;
    j["alphas"] = cfg.alphas;
    j["jprime"] = cfg.jprime;
    j["h_range"] = range_json(cfg.h_range);
    j["J_range"] = range_json(cfg.J_range);
    j["grid"] = cfg.grid;
    j["max_n"] = cfg.max_n;
    j["method"] = cfg.method;
    j["samples"] = cfg.samples;
    j["output"] = cfg.output;
    j["format"] = cfg.format == OutputFormat::Csv ? "csv" : "json";
    j["seed"] = cfg.seed ? json(*cfg.seed) : json(nullptr);
    j["deterministic"] = cfg.deterministic;
    j["threads"] = cfg.threads;
    return j;
}

void write_table(const RunConfig& cfg, const Table& t, std::ostream& out) {
    if (cfg.format == OutputFormat::Csv) {
        for (std::size_t i = 0; i < t.columns.size(); ++i) {
            out << (i ? "," : "") << t.columns[i].name << '[' << t.columns[i].unit << ']';
        }
        out << '\n';
        for (const auto& row : t.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_cell(row[i]);
            out << '\n';
        }
        return;
    }
    json doc;
    doc["config"] = config_json(cfg);
    json cols = json::array();
    for (const auto& c : t.columns) cols.push_back({{"name", c.name}, {"unit", c.unit}});
    doc["columns"] = cols;
    json rows = json::array();
    for (const auto& row : t.rows) {
        json r = json::object();
        for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i].name] = cell_json(row[i]);
        rows.push_back(r);
    }
    doc["rows"] = rows;
    doc["summary"] = t.summary;
    out << doc.dump(2) << '\n';
}

// Commands ------------------------------------------------------------------

Table run_exact(const RunConfig& cfg) {
    Table t;
    t.columns = {{"N", "sites"},         {"N_A", "sites"},       {"N_B", "sites"},
                 {"logZ", "nats"},       {"logZ_per_site", "nats/site"},
                 {"dA", "1/site"},       {"dB", "1/site"},       {"dAB", "1/site"},
                 {"d_mix", "fraction"},  {"classes", "count"}};
    EnumerationOptions eo{cfg.max_n, cfg.threads};
    for (int n : cfg.sizes) {
        const GibbsSummary g = enumerate_gibbs(n, cfg.params, eo);
        t.rows.push_back({(long long)n, (long long)g.sizes.n_a, (long long)g.sizes.n_b, g.log_z, g.log_z / n,
                          g.mean_counts[0] / n, g.mean_counts[1] / n, g.mean_counts[2] / n,
                          g.mean_mixed_fraction, (long long)g.classes});
    }
    return t;
}

Table run_pressure(const RunConfig& cfg) {
    Table t;
    t.columns = {{"index", "count"},         {"dA", "1/site"},      {"dB", "1/site"},
                 {"dAB", "1/site"},          {"psi", "nats/site"},  {"interior", "bool"},
                 {"grad_norm", "nats/site"}, {"fixed_point_residual", "1/site"},
                 {"pressure", "nats/site"}};
    MaximizeOptions mo;
    mo.grid = cfg.grid;
    const auto maxima = maximize_psi(cfg.params, mo);
    double p = -INFINITY;
    for (const auto& m : maxima) p = std::max(p, m.value);
    long long idx = 0;
    for (const auto& m : maxima) {
        const double grad = m.interior ? norm2(grad_psi(m.d, cfg.params)) : NAN;
        t.rows.push_back({idx++, m.d.a, m.d.b, m.d.ab, m.value, m.interior, grad,
                          fixed_point_residual(m.d, cfg.params), p});
    }
    t.summary["pressure"] = p;
    t.summary["maximizers"] = maxima.size();
    return t;
}

Table run_critical(const RunConfig& cfg) {
    const double a = cfg.params.alpha;
    const CriticalPoint cp = critical_point(a);
    const FAlpha f = f_alpha_derivatives(cp.d_c, a);
    const double h_limit = -2.0 - std::log((std::sqrt(5.0) - 1.0) / 2.0);
    Table t;
    t.columns = {{"alpha", "fraction"},       {"d_c", "1/site"},          {"h_c", "field"},
                 {"J_c", "coupling"},         {"d_c_minus_half_alpha", "1/site"},
                 {"J_c_minus_4_over_alpha", "coupling"},                  {"h_c_minus_limit", "field"},
                 {"f2_scaled", "dimensionless"}};
    t.rows.push_back({a, cp.d_c, cp.h_c, cp.J_c, cp.d_c - a / 2.0, cp.J_c - 4.0 / a, cp.h_c - h_limit,
                      f.d2 * cp.d_c * cp.d_c});
    t.summary = {{"alpha", a}, {"d_c", cp.d_c}, {"h_c", cp.h_c}, {"J_c", cp.J_c}, {"h_c_limit", h_limit}};
    return t;
}

std::vector<double> range_values(const Range& r) {
    std::vector<double> out;
    for (int i = 0; i < r.steps; ++i) {
        out.push_back(r.steps == 1 ? r.lo : r.lo + (r.hi - r.lo) * i / (r.steps - 1));
    }
    return out;
}

Table run_branches(const RunConfig& cfg) {
    const double a = cfg.params.alpha;
    const CriticalPoint cp = critical_point(a);
    const Range hr = cfg.h_range.value_or(Range{cp.h_c - 0.5, cp.h_c + 0.5, 11});
    const Range jr = cfg.J_range.value_or(Range{0.5 * cp.J_c, 1.5 * cp.J_c, 11});
    Table t;
    t.columns = {{"h", "field"},          {"J", "coupling"},   {"branch", "index"},
                 {"branch_count", "count"}, {"d", "1/site"},   {"psi1", "nats/site"},
                 {"stability", "label"}};
    for (double J : range_values(jr)) {
        for (double h : range_values(hr)) {
            const auto br = solve_branches({a, h, J});
            long long k = 0;
            for (const auto& b : br) {
                t.rows.push_back({h, J, k++, (long long)br.size(), b.d, b.psi1_value, std::string(to_string(b.stability))});
            }
        }
    }
    t.summary = {{"d_c", cp.d_c}, {"h_c", cp.h_c}, {"J_c", cp.J_c}};
    return t;
}

Table run_exponent(const RunConfig& cfg) {
    const double a = cfg.params.alpha;
    std::vector<double> offsets = cfg.offsets;
    if (offsets.empty()) {
        const double jc = critical_point(a).J_c;
        offsets = log_spaced(2.5e-3 * jc, 0.05 * jc, 9);
    }
    const ExponentScan scan = exponent_scan(a, offsets);
    Table t;
    t.columns = {{"offset", "coupling"},  {"J", "coupling"},       {"h", "field"},
                 {"d_star", "1/site"},    {"deviation", "1/site"}, {"exponent_fit", "dimensionless"},
                 {"prefactor_fit", "1/site"}};
    for (const auto& s : scan.samples) {
        t.rows.push_back({s.offset, s.J, s.h, s.d_star, s.deviation, scan.fit.exponent, scan.fit.prefactor});
    }
    t.summary = {{"alpha", a},
                 {"d_c", scan.critical.d_c},
                 {"h_c", scan.critical.h_c},
                 {"J_c", scan.critical.J_c},
                 {"exponent", scan.fit.exponent},
                 {"prefactor", scan.fit.prefactor},
                 {"reference_prefactor", scan.reference_prefactor}};
    return t;
}

Table run_scaled(const RunConfig& cfg) {
    const ScaledCritical sc = scaled_coupling_critical(cfg.jprime);
    const std::vector<double> alphas = cfg.alphas.empty() ? default_d_mix_alphas(sc) : cfg.alphas;
    const DMixScan scan = d_mix_scan(cfg.jprime, alphas);
    Table t;
    t.columns = {{"alpha", "fraction"},    {"J", "coupling"},         {"h", "field"},
                 {"d", "1/site"},          {"d_mix", "fraction"},     {"alpha_minus_alpha_c", "fraction"},
                 {"d_mix_minus_c", "fraction"}, {"exponent_fit", "dimensionless"}};
    for (const auto& s : scan.samples) {
        t.rows.push_back({s.alpha, s.J, s.h, s.d, s.d_mix, s.alpha - sc.alpha_c, s.d_mix - sc.d_mix_c,
                          scan.fit.exponent});
    }
    t.summary = {{"jprime", sc.Jprime},   {"alpha_c", sc.alpha_c}, {"h_c", sc.h_c},
                 {"d_c", sc.d_c},         {"J_c", sc.J_c},         {"d_mix_c", sc.d_mix_c},
                 {"exponent", scan.fit.exponent}, {"prefactor", scan.fit.prefactor}};
    return t;
}

Table run_gauss(const RunConfig& cfg) {
    GaussOptions go;
    go.method = cfg.method == "monte-carlo" ? GaussMethod::MonteCarlo : GaussMethod::Quadrature;
    go.samples = cfg.samples;
    if (cfg.seed) go.seed = *cfg.seed;
    Table t;
    t.columns = {{"kind", "label"},    {"N", "sites"},       {"N1", "sites"}, {"N2", "sites"},
                 {"value_a", "nats"},  {"value_b", "nats"},  {"delta", "relative"},
                 {"error", "nats"},    {"holds", "bool"}};
    const double a = cfg.params.alpha;
    const Vec3& h = cfg.params.h;
    for (int n : cfg.sizes) {
        const GaussEstimate g = z_via_gaussian(n, a, h, go);
        const double exact = log_partition_exact(n, cfg.params, {cfg.max_n, cfg.threads});
        const double rel = std::expm1(g.log_value - exact);
        t.rows.push_back({std::string("wick"), (long long)n, 0LL, 0LL, g.log_value, exact, rel, g.error,
                          std::fabs(rel) < 1e-6});
    }
    for (int n : cfg.sizes) {
        const GaussEstimate full = z_via_gaussian(n, a, h, go);
        const GaussEstimate star = z_star(n, a, h, go);
        t.rows.push_back({std::string("ratio"), (long long)n, 0LL, 0LL, full.log_value, star.log_value,
                          std::expm1(full.log_value - star.log_value), star.error, star.log_value <= full.log_value + 1e-9});
    }
    for (int n : cfg.sizes) {
        const int n1 = std::max(1, n / 2);
        const int n2 = n - n1;
        if (n2 < 1) continue;
        const SuperadditivityResult s = superadditivity_check(n1, n2, a, h, go);
        t.rows.push_back({std::string("superadditivity"), (long long)n, (long long)n1, (long long)n2, s.lhs, s.rhs,
                          s.rhs - s.lhs, 0.0, s.holds});
    }
    const LaplaceMaximum lm = laplace_maximum(a, weight_matrix(h));
    t.summary = {{"laplace_xi_A", lm.xi[0]},
                 {"laplace_xi_B", lm.xi[1]},
                 {"laplace_value", lm.value},
                 {"laplace_in_positive_quadrant", lm.in_positive_quadrant},
                 {"laplace_dominates", lm.dominates_other_regions}};
    return t;
}

Table run_convergence(const RunConfig& cfg) {
    const double p = pressure(cfg.params);
    std::vector<double> gaps, scale;
    std::vector<double> per_site;
    for (int n : cfg.sizes) {
        const double v = log_partition_exact(n, cfg.params, {cfg.max_n, cfg.threads}) / n;
        per_site.push_back(v);
        gaps.push_back(v - p);
        scale.push_back(std::log(double(n)) / n);
    }
    // Smallest C with |gap| <= C log N / N on every row.
    double c = 0.0;
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        if (scale[i] > 0.0) c = std::max(c, std::fabs(gaps[i]) / scale[i]);
    }
    Table t;
    t.columns = {{"N", "sites"},         {"logZ_per_site", "nats/site"}, {"pressure", "nats/site"},
                 {"difference", "nats/site"}, {"log_N_over_N", "1/site"}, {"envelope", "nats/site"}};
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        t.rows.push_back({(long long)cfg.sizes[i], per_site[i], p, gaps[i], scale[i], c * scale[i]});
    }
    t.summary = {{"pressure", p}, {"envelope_constant", c}};
    return t;
}

void apply_defaults(RunConfig& cfg) {
    if (cfg.sizes.empty()) {
        switch (cfg.command) {
        case Command::Gauss: cfg.sizes = {2, 4, 8, 16, 32}; break;
        case Command::Convergence: cfg.sizes = {50, 100, 200, 400}; break;
        default: cfg.sizes = {2, 4, 8, 16, 32, 64}; break;
        }
    }
}

void print_error(std::ostream& err, const char* kind, const std::string& message) {
    err << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
}

} // namespace

void RunConfig::validate() const {
    params.validate();
    for (int n : sizes) {
        if (n < 1) throw ValidationError("sizes must be positive");
    }
    for (double v : offsets) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("offsets must be positive and finite");
    }
    for (double v : alphas) {
        if (!(v > 0.0 && v < 1.0)) throw ValidationError("alphas must lie in (0,1)");
    }
    if (!(jprime > 0.0) || !std::isfinite(jprime)) throw ValidationError("jprime must be positive");
    if (grid < 2) throw ValidationError("grid must be at least 2");
    if (max_n < 2) throw ValidationError("max_n must be at least 2");
    if (threads < 1) throw ValidationError("threads must be at least 1");
    if (method != "quadrature" && method != "monte-carlo") throw ValidationError("unknown method " + method);
    for (const auto* r : {&h_range, &J_range}) {
        if (*r && (!std::isfinite(r->value().lo) || !std::isfinite(r->value().hi))) {
            throw ValidationError("range bounds must be finite");
        }
    }
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "alpha") {
        cfg.params.alpha = parse_double(value);
    } else if (key == "h") {
        const auto v = parse_doubles(value);
        if (v.size() != 3) throw ValidationError("h needs 3 values");
        cfg.params.h = {v[0], v[1], v[2]};
    } else if (key == "J") {
        const auto v = parse_doubles(value);
        if (v.size() != 9) throw ValidationError("J needs 9 values");
        for (int i = 0; i < 9; ++i) cfg.params.J[i / 3][i % 3] = v[i];
    } else if (key == "h_ab") {
        cfg.params.h[kAB] = parse_double(value);
    } else if (key == "J_ab") {
        cfg.params.J[kAB][kAB] = parse_double(value);
    } else if (key == "N") {
        cfg.sizes = parse_sizes(value);
    } else if (key == "offsets") {
        cfg.offsets = parse_doubles(value);
    } else if (key == "alphas") {
        cfg.alphas = parse_doubles(value);
    } else if (key == "jprime") {
        cfg.jprime = parse_double(value);
    } else if (key == "h_range") {
        cfg.h_range = parse_range(value);
    } else if (key == "J_range") {
        cfg.J_range = parse_range(value);
    } else if (key == "grid") {
        cfg.grid = int(parse_int(value));
    } else if (key == "max_n") {
        cfg.max_n = int(parse_int(value));
    } else if (key == "method") {
        cfg.method = value;
    } else if (key == "samples") {
        const long long s = parse_int(value);
        if (s < 2) throw ValidationError("samples must be at least 2");
        cfg.samples = std::uint64_t(s);
    } else if (key == "output") {
        cfg.output = value;
    } else if (key == "format") {
        if (value == "csv") {
            cfg.format = OutputFormat::Csv;
        } else if (value == "json") {
            cfg.format = OutputFormat::Json;
        } else {
            throw ValidationError("format must be csv or json");
        }
    } else if (key == "seed") {
        const long long s = parse_int(value);
        if (s < 0) throw ValidationError("seed must be nonnegative");
        cfg.seed = std::uint64_t(s);
    } else if (key == "deterministic") {
        cfg.deterministic = parse_bool(value);
    } else if (key == "threads") {
        const long long t = parse_int(value);
        if (t < 1) throw ValidationError("threads must be at least 1");
        cfg.threads = unsigned(t);
    } else {
        throw ValidationError("unknown setting '" + key + "'");
    }
}

std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path);
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos || line[b] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": expected key=value");
        }
        auto trim = [](std::string s) {
            const auto first = s.find_first_not_of(" \t\r");
            const auto last = s.find_last_not_of(" \t\r");
            return first == std::string::npos ? std::string() : s.substr(first, last - first + 1);
        };
        out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return out;
}

int run(const RunConfig& input, std::ostream& out, std::ostream& err) {
    RunConfig cfg = input;
    try {
        apply_defaults(cfg);
        cfg.validate();
        Table t;
        switch (cfg.command) {
        case Command::Exact: t = run_exact(cfg); break;
        case Command::Pressure: t = run_pressure(cfg); break;
        case Command::Critical: t = run_critical(cfg); break;
        case Command::Branches: t = run_branches(cfg); break;
        case Command::Exponent: t = run_exponent(cfg); break;
        case Command::Scaled: t = run_scaled(cfg); break;
        case Command::Gauss: t = run_gauss(cfg); break;
        case Command::Convergence: t = run_convergence(cfg); break;
        }
        if (cfg.output.empty()) {
            write_table(cfg, t, out);
        } else {
            std::ofstream file(cfg.output);
            if (!file) throw ValidationError("cannot write " + cfg.output);
            write_table(cfg, t, file);
        }
        return 0;
    } catch (const ValidationError& e) {
        print_error(err, "validation", e.what());
        return 2;
    } catch (const NumericalError& e) {
        print_error(err, "numerical", e.what());
        return 3;
    }
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Two-population mean-field monomer-dimer solver"};
    app.set_help_flag("--help", "print this help and exit");
    app.require_subcommand(1);

    std::map<std::string, std::string> flags;
    std::string config_path;
    std::vector<std::pair<CLI::App*, Command>> subs;
    for (const auto& [name, cmd] : kCommands) {
        CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
        sub->set_help_flag("--help", "print this help and exit");
        for (const auto& [key, help] : kSettings) sub->add_option("--" + key, flags[key], help);
        sub->add_option("--config", config_path, "key=value file; entries override flags");
        subs.emplace_back(sub, cmd);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        print_error(err, "validation", e.what());
        const CLI::App* shown = &app;
        for (const auto& [sub, cmd] : subs) {
            if (sub->parsed()) shown = sub;
        }
        err << shown->help();
        return 2;
    }

    RunConfig cfg;
    for (const auto& [sub, cmd] : subs) {
        if (sub->parsed()) cfg.command = cmd;
    }
    if (cfg.command == Command::Gauss) cfg.params.h = {0.0, 0.0, -1.0};
    try {
        for (const auto& [sub, cmd] : subs) {
            if (!sub->parsed()) continue;
            for (const auto& [key, help] : kSettings) {
                if (sub->get_option("--" + key)->count() > 0) apply_setting(cfg, key, flags[key]);
            }
        }
        if (!config_path.empty()) {
            for (const auto& [key, value] : read_config_file(config_path)) apply_setting(cfg, key, value);
        }
    } catch (const ValidationError& e) {
        print_error(err, "validation", e.what());
        err << app.help();
        return 2;
    }
    return run(cfg, out, err);
}

} // namespace mdm::cli
