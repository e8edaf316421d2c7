#include "ospring/config.hpp"

#include <charconv>
#include <cmath>
#include "ospring/detail/strfmt.hpp"
#include <fstream>
#include <map>
#include <sstream>

#include "ospring/errors.hpp"

namespace ospring {

namespace {

constexpr double two_pi = 2.0 * M_PI;

struct Value {
    enum class Type { number, string, boolean, array } type = Type::number;
    double num = 0.0;
    std::string str;
    bool b = false;
    std::vector<double> arr;
    int line = 0;
};

using Table = std::map<std::string, Value>;

struct Document {
    Table oscillator;
    std::vector<Table> fields;
    Table detector;
    Table feedback;
    Table constants;
};

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw ConfigError(detail::strfmt("config line %d: %s", line, msg.c_str()));
}

double parse_number(const std::string& tok, int line) {
    const std::string t = trim(tok);
    double v = 0.0;
    const char* begin = t.data();
    const char* end = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end) fail(line, "expected a number: '" + t + "'");
    if (!std::isfinite(v)) fail(line, "non-finite number");
    return v;
}

Value parse_value(const std::string& raw, int line) {
    Value v;
    v.line = line;
    const std::string t = trim(raw);
    if (t.empty()) fail(line, "missing value");
    if (t.front() == '"') {
        if (t.size() < 2 || t.back() != '"') fail(line, "unterminated string");
        v.type = Value::Type::string;
        v.str = t.substr(1, t.size() - 2);
        return v;
    }
    if (t == "true" || t == "false") {
        v.type = Value::Type::boolean;
        v.b = (t == "true");
        return v;
    }
    if (t.front() == '[') {
        if (t.back() != ']') fail(line, "unterminated array");
        v.type = Value::Type::array;
        std::string body = t.substr(1, t.size() - 2);
        std::stringstream ss(body);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (trim(item).empty()) continue;
            v.arr.push_back(parse_number(item, line));
        }
        return v;
    }
    v.type = Value::Type::number;
    v.num = parse_number(t, line);
    return v;
}

// Strips a trailing comment, respecting double-quoted strings.
std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_str = !in_str;
        if (line[i] == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

Document parse_document(const std::string& text) {
    Document doc;
    Table* current = nullptr;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            const bool array_table = line.starts_with("[[");
            const auto close = line.find(array_table ? "]]" : "]");
            if (close == std::string::npos) fail(lineno, "unterminated section header");
            section = trim(line.substr(array_table ? 2 : 1,
                                       close - (array_table ? 2 : 1)));
            if (array_table) {
                if (section != "field")
                    fail(lineno, "only [[field]] may repeat");
                doc.fields.emplace_back();
                current = &doc.fields.back();
            } else if (section == "oscillator") {
                current = &doc.oscillator;
            } else if (section == "detector") {
                current = &doc.detector;
            } else if (section == "feedback") {
                current = &doc.feedback;
            } else if (section == "constants-override") {
                current = &doc.constants;
            } else if (section == "field") {
                fail(lineno, "[field] must be written [[field]]");
            } else {
                fail(lineno, "unknown section '" + section + "'");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(lineno, "expected 'key = value'");
        if (!current) fail(lineno, "key outside of any section");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) fail(lineno, "empty key");
        if (current->contains(key)) fail(lineno, "duplicate key '" + key + "'");
        (*current)[key] = parse_value(line.substr(eq + 1), lineno);
    }
    return doc;
}

double need_num(const Table& t, const std::string& key, const char* where) {
    const auto it = t.find(key);
    if (it == t.end())
        throw ConfigError(
            detail::strfmt("missing key '%s' in [%s]", key.c_str(), where));
    if (it->second.type != Value::Type::number)
        fail(it->second.line, "'" + key + "' must be a number");
    return it->second.num;
}

double opt_num(const Table& t, const std::string& key, double fallback) {
    const auto it = t.find(key);
    if (it == t.end()) return fallback;
    if (it->second.type != Value::Type::number)
        fail(it->second.line, "'" + key + "' must be a number");
    return it->second.num;
}

void check_known_keys(const Table& t, std::initializer_list<const char*> known,
                      const char* where) {
    for (const auto& [key, val] : t) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok)
            fail(val.line,
                 detail::strfmt("unknown key '%s' in [%s]", key.c_str(), where));
    }
}

}  // namespace

ConfigInput parse_config_text(const std::string& text) {
    const Document doc = parse_document(text);
    ConfigInput cfg;

    check_known_keys(doc.oscillator, {"mass_kg", "f_m_hz", "q", "t_env_k"},
                     "oscillator");
    cfg.mass_kg = need_num(doc.oscillator, "mass_kg", "oscillator");
    cfg.f_m_hz = need_num(doc.oscillator, "f_m_hz", "oscillator");
    cfg.q = need_num(doc.oscillator, "q", "oscillator");
    cfg.t_env_k = need_num(doc.oscillator, "t_env_k", "oscillator");

    if (doc.fields.empty()) throw ConfigError("at least one [[field]] required");
    for (const auto& ft : doc.fields) {
        check_known_keys(ft,
                         {"label", "length_m", "wavelength_m", "gamma_hz",
                          "detuning_hz", "power_w", "loss_ppm",
                          "amplitude_noise_factor"},
                         "field");
        OpticalFieldInput fi;
        const auto it = ft.find("label");
        if (it == ft.end() || it->second.type != Value::Type::string)
            throw ConfigError("every [[field]] needs a string 'label'");
        fi.label = it->second.str;
        fi.length = need_num(ft, "length_m", "field");
        fi.wavelength = need_num(ft, "wavelength_m", "field");
        fi.gamma = two_pi * need_num(ft, "gamma_hz", "field");
        fi.detuning = two_pi * need_num(ft, "detuning_hz", "field");
        fi.p_circ = need_num(ft, "power_w", "field");
        fi.epsilon = 1e-6 * opt_num(ft, "loss_ppm", 0.0);
        fi.v1_density = opt_num(ft, "amplitude_noise_factor", 1.0);
        for (const auto& other : cfg.fields) {
            if (other.label == fi.label)
                throw ConfigError("duplicate field label '" + fi.label + "'");
        }
        cfg.fields.push_back(fi);
    }

    check_known_keys(doc.detector, {"eta"}, "detector");
    cfg.eta = opt_num(doc.detector, "eta", 1.0);

    check_known_keys(doc.feedback, {"kind", "gain", "zeros_hz", "poles_hz"},
                     "feedback");
    if (const auto it = doc.feedback.find("kind"); it != doc.feedback.end()) {
        if (it->second.type != Value::Type::string)
            fail(it->second.line, "'kind' must be a string");
        cfg.kernel.kind = it->second.str;
    }
    cfg.kernel.gain = opt_num(doc.feedback, "gain", 0.0);
    if (const auto it = doc.feedback.find("zeros_hz"); it != doc.feedback.end())
        cfg.kernel.zeros_hz = it->second.arr;
    if (const auto it = doc.feedback.find("poles_hz"); it != doc.feedback.end())
        cfg.kernel.poles_hz = it->second.arr;

    check_known_keys(doc.constants, {"hbar", "k_b", "c"}, "constants-override");
    cfg.constants.hbar = opt_num(doc.constants, "hbar", cfg.constants.hbar);
    cfg.constants.k_b = opt_num(doc.constants, "k_b", cfg.constants.k_b);
    cfg.constants.c = opt_num(doc.constants, "c", cfg.constants.c);

    return cfg;
}

ConfigInput parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

namespace {

// Shortest representation that round-trips the double exactly.
std::string num(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string to_config_text(const ConfigInput& in) {
    std::ostringstream out;
    out << "[oscillator]\n";
    out << "mass_kg = " << num(in.mass_kg) << "\n";
    out << "f_m_hz = " << num(in.f_m_hz) << "\n";
    out << "q = " << num(in.q) << "\n";
    out << "t_env_k = " << num(in.t_env_k) << "\n";
    for (const auto& f : in.fields) {
        out << "\n[[field]]\n";
        out << "label = \"" << f.label << "\"\n";
        out << "length_m = " << num(f.length) << "\n";
        out << "wavelength_m = " << num(f.wavelength) << "\n";
        out << "gamma_hz = " << num(f.gamma / two_pi) << "\n";
        out << "detuning_hz = " << num(f.detuning / two_pi) << "\n";
        out << "power_w = " << num(f.p_circ) << "\n";
        out << "loss_ppm = " << num(f.epsilon * 1e6) << "\n";
        out << "amplitude_noise_factor = " << num(f.v1_density) << "\n";
    }
    out << "\n[detector]\n";
    out << "eta = " << num(in.eta) << "\n";
    out << "\n[feedback]\n";
    out << "kind = \"" << in.kernel.kind << "\"\n";
    out << "gain = " << num(in.kernel.gain) << "\n";
    if (!in.kernel.zeros_hz.empty() || !in.kernel.poles_hz.empty()) {
        out << "zeros_hz = [";
        for (std::size_t i = 0; i < in.kernel.zeros_hz.size(); ++i)
            out << (i ? ", " : "") << num(in.kernel.zeros_hz[i]);
        out << "]\n";
        out << "poles_hz = [";
        for (std::size_t i = 0; i < in.kernel.poles_hz.size(); ++i)
            out << (i ? ", " : "") << num(in.kernel.poles_hz[i]);
        out << "]\n";
    }
    out << "\n[constants-override]\n";
    out << "hbar = " << num(in.constants.hbar) << "\n";
    out << "k_b = " << num(in.constants.k_b) << "\n";
    out << "c = " << num(in.constants.c) << "\n";
    return out.str();
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

SystemConfig derive(const ConfigInput& in) {
    validate(in.constants);
    SystemConfig sys;
    sys.constants = in.constants;
    sys.mech = MechanicalOscillator::make(in.mass_kg, two_pi * in.f_m_hz, in.q,
                                          in.t_env_k);
    for (const auto& fi : in.fields) {
        sys.fields.push_back(derive_field(fi, in.constants, &sys.warnings));
    }
    if (!(in.eta > 0.0) || in.eta > 1.0)
        throw ConfigError("detector eta must be in (0, 1]");
    sys.det.eta = in.eta;

    FeedbackKernel k;
    if (in.kernel.kind == "off") k.kind = KernelKind::off;
    else if (in.kernel.kind == "flat") k.kind = KernelKind::flat;
    else if (in.kernel.kind == "rational") k.kind = KernelKind::rational;
    else if (in.kernel.kind == "ideal") k.kind = KernelKind::ideal;
    else throw ConfigError("feedback kind must be off|flat|rational|ideal, got '" +
                           in.kernel.kind + "'");
    k.gain = in.kernel.gain;
    for (const double z : in.kernel.zeros_hz) k.zeros.emplace_back(two_pi * z, 0.0);
    for (const double p : in.kernel.poles_hz) k.poles.emplace_back(two_pi * p, 0.0);
    if (k.kind == KernelKind::flat && !(k.gain > 0.0))
        throw ConfigError("flat feedback needs gain > 0");
    if (k.kind == KernelKind::rational && k.poles.empty())
        throw ConfigError("rational feedback needs at least one pole");
    sys.kernel = k;

    // The viscous thermal-force model assumes k_B T well above hbar omega_m.
    if (sys.mech.t_env > 0.0 &&
        in.constants.k_b * sys.mech.t_env <
            10.0 * in.constants.hbar * sys.mech.omega_m) {
        sys.warnings.push_back(
            "t_env_k is within a decade of the oscillator ground-state "
            "energy; the white thermal-force density is a high-temperature "
            "model");
    }

    sys.hash = fnv1a64(to_config_text(in));
    return sys;
}

const OpticalField& SystemConfig::field(const std::string& label) const {
    for (const auto& f : fields) {
        if (f.in.label == label) return f;
    }
    throw ConfigError("no field labeled '" + label + "'");
}

double get_leaf(const ConfigInput& in, const std::string& path) {
    const auto dot1 = path.find('.');
    if (dot1 == std::string::npos) throw ConfigError("bad parameter path: " + path);
    const std::string head = path.substr(0, dot1);
    const std::string rest = path.substr(dot1 + 1);
    if (head == "oscillator") {
        if (rest == "mass_kg") return in.mass_kg;
        if (rest == "f_m_hz") return in.f_m_hz;
        if (rest == "q") return in.q;
        if (rest == "t_env_k") return in.t_env_k;
    } else if (head == "detector") {
        if (rest == "eta") return in.eta;
    } else if (head == "feedback") {
        if (rest == "gain") return in.kernel.gain;
    } else if (head == "field") {
        const auto dot2 = rest.find('.');
        if (dot2 == std::string::npos)
            throw ConfigError("field path needs a label: " + path);
        const std::string label = rest.substr(0, dot2);
        const std::string key = rest.substr(dot2 + 1);
        for (const auto& f : in.fields) {
            if (f.label != label) continue;
            if (key == "power_w") return f.p_circ;
            if (key == "gamma_hz") return f.gamma / two_pi;
            if (key == "detuning_hz") return f.detuning / two_pi;
            if (key == "loss_ppm") return f.epsilon * 1e6;
            if (key == "wavelength_m") return f.wavelength;
            if (key == "length_m") return f.length;
            if (key == "amplitude_noise_factor") return f.v1_density;
            throw ConfigError("unknown field key: " + key);
        }
        throw ConfigError("no field labeled '" + label + "'");
    }
    throw ConfigError("unknown parameter path: " + path);
}

void set_leaf(ConfigInput& in, const std::string& path, double value) {
    const auto dot1 = path.find('.');
    if (dot1 == std::string::npos) throw ConfigError("bad parameter path: " + path);
    const std::string head = path.substr(0, dot1);
    const std::string rest = path.substr(dot1 + 1);
    if (head == "oscillator") {
        if (rest == "mass_kg") { in.mass_kg = value; return; }
        if (rest == "f_m_hz") { in.f_m_hz = value; return; }
        if (rest == "q") { in.q = value; return; }
        if (rest == "t_env_k") { in.t_env_k = value; return; }
    } else if (head == "detector") {
        if (rest == "eta") { in.eta = value; return; }
    } else if (head == "feedback") {
        if (rest == "gain") { in.kernel.gain = value; return; }
    } else if (head == "field") {
        const auto dot2 = rest.find('.');
        if (dot2 == std::string::npos)
            throw ConfigError("field path needs a label: " + path);
        const std::string label = rest.substr(0, dot2);
        const std::string key = rest.substr(dot2 + 1);
        for (auto& f : in.fields) {
            if (f.label != label) continue;
            if (key == "power_w") { f.p_circ = value; return; }
            if (key == "gamma_hz") { f.gamma = two_pi * value; return; }
            if (key == "detuning_hz") { f.detuning = two_pi * value; return; }
            if (key == "loss_ppm") { f.epsilon = 1e-6 * value; return; }
            if (key == "wavelength_m") { f.wavelength = value; return; }
            if (key == "length_m") { f.length = value; return; }
            if (key == "amplitude_noise_factor") { f.v1_density = value; return; }
            throw ConfigError("unknown field key: " + key);
        }
        throw ConfigError("no field labeled '" + label + "'");
    }
    throw ConfigError("unknown parameter path: " + path);
}

}  // namespace ospring
