#include "vortexlab/config.h"

#include <complex>
#include <sstream>

namespace vortexlab {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_real(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' expects a real number, got '" + v + "'");
    }
}

long long parse_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'");
    }
}

const struct {
    Experiment e;
    const char* name;
} kExperiments[] = {
    {Experiment::solve_vortex, "solve-vortex"},
    {Experiment::solve_gravitating, "solve-gravitating"},
    {Experiment::solve_twisted, "solve-twisted"},
    {Experiment::ray_slope, "ray-slope"},
    {Experiment::convexity_scan, "convexity-scan"},
    {Experiment::epsilon_geodesic, "epsilon-geodesic"},
    {Experiment::stability, "stability"},
    {Experiment::energy_report, "energy-report"},
};

}  // namespace

const char* experiment_name(Experiment e) {
    for (const auto& row : kExperiments)
        if (row.e == e) return row.name;
    return "?";
}

std::shared_ptr<const Surface> RunConfig::build_surface() const {
    if (genus == 1) return build_torus({modulus_re, modulus_im}, volume, resolution);
    return build_sphere(volume, band_limit);
}

RunConfig parse_run_config(const std::string& text) {
    RunConfig cfg;
    bool have_genus = false, have_volume = false, have_resolution = false, have_band = false,
         have_experiment = false;
    std::string divisor_lines;

    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) + ": malformed section");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "surface" && section != "divisor" && section != "physics" &&
                section != "run")
                throw ConfigError("config line " + std::to_string(lineno) + ": unknown section [" +
                                  section + "]");
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (section.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": key outside any section");

        if (section == "surface") {
            if (key == "genus") {
                long long gv = parse_int(key, val);
                if (gv != 0 && gv != 1) throw ConfigError("config: genus must be 0 or 1");
                cfg.genus = (int)gv;
                have_genus = true;
            } else if (key == "volume") {
                cfg.volume = parse_real(key, val);
                have_volume = true;
            } else if (key == "resolution") {
                cfg.resolution = (int)parse_int(key, val);
                have_resolution = true;
            } else if (key == "band_limit") {
                cfg.band_limit = (int)parse_int(key, val);
                have_band = true;
            } else if (key == "modulus_re") {
                cfg.modulus_re = parse_real(key, val);
            } else if (key == "modulus_im") {
                cfg.modulus_im = parse_real(key, val);
            } else {
                throw ConfigError("config: unknown key '" + key + "' in [surface]");
            }
        } else if (section == "divisor") {
            if (key == "point") {
                divisor_lines += val;
                divisor_lines += '\n';
            } else {
                throw ConfigError("config: unknown key '" + key + "' in [divisor]");
            }
        } else if (section == "physics") {
            if (key == "tau")
                cfg.tau = parse_real(key, val);
            else if (key == "alpha")
                cfg.alpha = parse_real(key, val);
            else if (key == "lambda")
                cfg.lambda = parse_real(key, val);
            else if (key == "epsilon")
                cfg.epsilon = parse_real(key, val);
            else
                throw ConfigError("config: unknown key '" + key + "' in [physics]");
        } else {  // run
            if (key == "experiment") {
                bool found = false;
                for (const auto& row : kExperiments)
                    if (val == row.name) {
                        cfg.experiment = row.e;
                        found = true;
                    }
                if (!found) throw ConfigError("config: unknown experiment '" + val + "'");
                have_experiment = true;
            } else if (key == "output") {
                if (val.empty()) throw ConfigError("config: output must not be empty");
                cfg.output = val;
            } else if (key == "seed") {
                long long s = parse_int(key, val);
                if (s < 0) throw ConfigError("config: seed must be nonnegative");
                cfg.seed = (unsigned long long)s;
            } else {
                throw ConfigError("config: unknown key '" + key + "' in [run]");
            }
        }
    }

    if (!have_genus) throw ConfigError("config: [surface] genus is required");
    if (!have_volume || !(cfg.volume > 0.0))
        throw ConfigError("config: [surface] volume must be given and positive");
    if (!have_experiment) throw ConfigError("config: [run] experiment is required");
    if (cfg.genus == 1) {
        if (!have_resolution) throw ConfigError("config: torus surface needs resolution");
        if (have_band) throw ConfigError("config: band_limit is a sphere key");
        if (!(cfg.modulus_im > 0.0)) throw ConfigError("config: modulus_im must be positive");
    } else {
        if (!have_band) throw ConfigError("config: sphere surface needs band_limit");
        if (have_resolution) throw ConfigError("config: resolution is a torus key");
    }
    if (!(cfg.tau > 0.0)) throw ConfigError("config: tau must be positive");
    if (cfg.alpha < 0.0) throw ConfigError("config: alpha must be nonnegative");
    if (!(cfg.epsilon > 0.0)) throw ConfigError("config: epsilon must be positive");
    if (divisor_lines.empty()) throw ConfigError("config: [divisor] needs at least one point");
    try {
        cfg.divisor = parse_divisor(divisor_lines, cfg.genus);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: bad divisor: ") + e.what());
    }
    return cfg;
}

std::string resolved_config_text(const RunConfig& cfg) {
    std::ostringstream os;
    os.precision(17);
    os << "[surface]\n";
    os << "genus = " << cfg.genus << "\n";
    os << "volume = " << cfg.volume << "\n";
    if (cfg.genus == 1) {
        os << "resolution = " << cfg.resolution << "\n";
        os << "modulus_re = " << cfg.modulus_re << "\n";
        os << "modulus_im = " << cfg.modulus_im << "\n";
    } else {
        os << "band_limit = " << cfg.band_limit << "\n";
    }
    os << "\n[divisor]\n";
    std::istringstream div(format_divisor(cfg.divisor));
    std::string line;
    while (std::getline(div, line))
        if (!line.empty()) os << "point = " << line << "\n";
    os << "\n[physics]\n";
    os << "tau = " << cfg.tau << "\n";
    os << "alpha = " << cfg.alpha << "\n";
    os << "lambda = " << cfg.lambda << "\n";
    os << "epsilon = " << cfg.epsilon << "\n";
    os << "\n[run]\n";
    os << "experiment = " << experiment_name(cfg.experiment) << "\n";
    os << "output = " << cfg.output << "\n";
    os << "seed = " << cfg.seed << "\n";
    return os.str();
}

std::string config_schema_text() {
    return
        "[surface]\n"
        "genus = 0 | 1                    (required; 0 sphere, 1 torus)\n"
        "volume = <positive real>         (required)\n"
        "resolution = <even int >= 16>    (torus only; grid is resolution^2)\n"
        "band_limit = <int >= 8>          (sphere only)\n"
        "modulus_re = <real>              (torus; default 0)\n"
        "modulus_im = <positive real>     (torus; default 1)\n"
        "\n"
        "[divisor]\n"
        "point = <x> <y> <multiplicity>   (repeatable; lattice coords on the torus,\n"
        "                                  affine chart coords on the sphere)\n"
        "point = inf <multiplicity>       (sphere only: point at infinity)\n"
        "\n"
        "[physics]\n"
        "tau = <positive real>            (default 1)\n"
        "alpha = <nonnegative real>       (default 0)\n"
        "lambda = <real>                  (default 0; twist strength)\n"
        "epsilon = <positive real>        (default 0.05; geodesic relaxation)\n"
        "\n"
        "[run]\n"
        "experiment = solve-vortex | solve-gravitating | solve-twisted | ray-slope |\n"
        "             convexity-scan | epsilon-geodesic | stability | energy-report\n"
        "output = <directory>             (default out)\n"
        "seed = <nonnegative int>         (default 0)\n";
}

}  // namespace vortexlab
