#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "biphos/csv.hpp"
#include "biphos/params.hpp"

namespace biphos {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

double parse_double(const std::string& v) {
    double out{};
    const char* first = v.data();
    const char* last = v.data() + v.size();
    const auto res = std::from_chars(first, last, out);
    if (res.ec != std::errc{} || res.ptr != last)
        throw std::invalid_argument("expected a number, got '" + v + "'");
    return out;
}

// One assignment per line; returns false for unknown keys.
bool apply_key(Params& p, const std::string& key, const std::string& value) {
    if (key == "k_vn") p.k_vn = parse_double(value);
    else if (key == "k_vcy") p.k_vcy = parse_double(value);
    else if (key == "k_nt") p.k_nt = parse_double(value);
    else if (key == "K_c") p.K_c = parse_double(value);
    else if (key == "tau") p.tau = parse_double(value);
    else if (key == "A_cyto") p.A_cyto = parse_double(value);
    else if (key == "A_n") p.A_n = parse_double(value);
    else if (key == "m") p.m = parse_double(value);
    else if (key == "m_sca") p.m_sca = parse_double(value);
    else if (key == "sigma") p.sigma = parse_double(value);
    else if (key == "use_piecewise_fsca") p.use_piecewise_fsca = parse_bool(value);
    else return false;
    return true;
}

Params parse_config(std::istream& in, const std::string& origin) {
    Params p;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        auto fail = [&](const std::string& why) {
            throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                        ": " + why);
        };
        if (eq == std::string::npos) fail("expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) fail("expected 'key = value'");
        try {
            if (!apply_key(p, key, value)) fail("unknown key '" + key + "'");
        } catch (const std::invalid_argument& e) {
            if (std::string(e.what()).rfind(origin, 0) == 0) throw;
            fail(std::string(e.what()));
        }
    }
    p.validate();
    return p;
}

}  // namespace

Params params_from_config(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in, "<config>");
}

Params params_from_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    return parse_config(in, path);
}

void apply_param_assignment(Params& p, const std::string& assignment) {
    const auto eq = assignment.find('=');
    auto fail = [&](const std::string& why) {
        throw std::invalid_argument("--set '" + assignment + "': " + why);
    };
    if (eq == std::string::npos) fail("expected KEY=VALUE");
    const std::string key = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    if (key.empty() || value.empty()) fail("expected KEY=VALUE");
    try {
        if (!apply_key(p, key, value)) fail("unknown key '" + key + "'");
    } catch (const std::invalid_argument& e) {
        if (std::string(e.what()).rfind("--set", 0) == 0) throw;
        fail(e.what());
    }
}

std::string params_to_config(const Params& p) {
    std::ostringstream out;
    out << "k_vn = " << format_double(p.k_vn) << '\n'
        << "k_vcy = " << format_double(p.k_vcy) << '\n'
        << "k_nt = " << format_double(p.k_nt) << '\n'
        << "K_c = " << format_double(p.K_c) << '\n'
        << "tau = " << format_double(p.tau) << '\n'
        << "A_cyto = " << format_double(p.A_cyto) << '\n'
        << "A_n = " << format_double(p.A_n) << '\n'
        << "m = " << format_double(p.m) << '\n'
        << "m_sca = " << format_double(p.m_sca) << '\n'
        << "sigma = " << format_double(p.sigma) << '\n'
        << "use_piecewise_fsca = " << (p.use_piecewise_fsca ? "true" : "false")
        << '\n';
    return out.str();
}

}  // namespace biphos
