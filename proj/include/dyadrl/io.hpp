#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dyadrl/errors.hpp"
#include "dyadrl/trial.hpp"

namespace dyadrl {

/// Shortest round-trip decimal form of a double; bit-exact on re-parse,
/// which is what makes exported files byte-stable across runs.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double_exact(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ConfigError("io: bad numeric field '" + s + "'");
    return v;
}

/// FNV-1a 64-bit, used to fingerprint config files in manifests.
inline std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string to_hex(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Population files: versioned columnar text, one row per dyad, one column per
// coefficient, metadata in leading '#' lines.
// ---------------------------------------------------------------------------

namespace detail {

inline const std::vector<std::string>& population_columns() {
    static const std::vector<std::string> cols = [] {
        std::vector<std::string> c;
        for (const char* window : {"adh_am", "adh_pm", "distress"})
            for (const char* f : {"b0", "b1", "b2", "b3", "b4", "t0", "t1", "t2"})
                c.push_back(std::string(window) + "_" + f);
        c.push_back("distress_noise_sd");
        for (const char* f : {"b0", "b1", "b2", "b3", "t0", "t1"})
            c.push_back(std::string("rel_") + f);
        for (const char* role : {"burden_aya", "burden_care"})
            for (const char* f : {"th0", "th1", "th2", "th3", "noise_sd"})
                c.push_back(std::string(role) + "_" + f);
        for (const char* f : {"mean_aya", "sd_aya", "mean_care", "sd_care"})
            c.push_back(std::string("scaling_") + f);
        c.push_back("mediator_multiplier");
        return c;
    }();
    return cols;
}

inline std::vector<double> dyad_row(const DyadParams& d) {
    std::vector<double> row;
    for (const OutcomeCoeffs* o : {&d.adherence_am, &d.adherence_pm, &d.distress}) {
        row.insert(row.end(), {o->b0, o->b1, o->b2, o->b3, o->b4, o->t0, o->t1, o->t2});
    }
    row.push_back(d.distress_noise_sd);
    row.insert(row.end(), {d.relationship.b0, d.relationship.b1, d.relationship.b2,
                           d.relationship.b3, d.relationship.t0, d.relationship.t1});
    for (const BurdenCoeffs* b : {&d.burden_aya, &d.burden_care})
        row.insert(row.end(), {b->th0, b->th1, b->th2, b->th3, b->noise_sd});
    row.insert(row.end(), {d.burden_scaling.mean_aya, d.burden_scaling.sd_aya,
                           d.burden_scaling.mean_care, d.burden_scaling.sd_care});
    row.push_back(d.mediator_multiplier);
    return row;
}

inline DyadParams dyad_from_row(const std::vector<double>& row) {
    DyadParams d;
    std::size_t i = 0;
    for (OutcomeCoeffs* o : {&d.adherence_am, &d.adherence_pm, &d.distress}) {
        o->b0 = row[i++];
        o->b1 = row[i++];
        o->b2 = row[i++];
        o->b3 = row[i++];
        o->b4 = row[i++];
        o->t0 = row[i++];
        o->t1 = row[i++];
        o->t2 = row[i++];
    }
    d.distress_noise_sd = row[i++];
    d.relationship.b0 = row[i++];
    d.relationship.b1 = row[i++];
    d.relationship.b2 = row[i++];
    d.relationship.b3 = row[i++];
    d.relationship.t0 = row[i++];
    d.relationship.t1 = row[i++];
    for (BurdenCoeffs* b : {&d.burden_aya, &d.burden_care}) {
        b->th0 = row[i++];
        b->th1 = row[i++];
        b->th2 = row[i++];
        b->th3 = row[i++];
        b->noise_sd = row[i++];
    }
    d.burden_scaling.mean_aya = row[i++];
    d.burden_scaling.sd_aya = row[i++];
    d.burden_scaling.mean_care = row[i++];
    d.burden_scaling.sd_care = row[i++];
    d.mediator_multiplier = row[i++];
    return d;
}

}  // namespace detail

inline std::string population_to_text(const Population& pop) {
    std::ostringstream os;
    os << "# dyadrl-population v1\n";
    os << "# c_treat = " << format_double(pop.c_treat) << "\n";
    os << "# ste_target = " << format_double(pop.ste_target) << "\n";
    os << "# achieved_ste = " << format_double(pop.achieved_ste) << "\n";
    os << "# seed = " << pop.seed << "\n";
    os << "# mediator_gamma = " << format_double(pop.env.mediator_gamma) << "\n";
    os << "# burn_in_steps = " << pop.env.burn_in_steps << "\n";
    const auto& cols = detail::population_columns();
    for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
    os << "\n";
    for (const DyadParams& d : pop.dyads) {
        const auto row = detail::dyad_row(d);
        for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_double(row[c]);
        os << "\n";
    }
    return os.str();
}

inline Population population_from_text(std::istream& in) {
    Population pop;
    std::string line;
    bool version_seen = false, header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.front() == '#') {
            std::string body = line.substr(1);
            if (body.find("dyadrl-population v1") != std::string::npos) {
                version_seen = true;
                continue;
            }
            const std::size_t eq = body.find('=');
            if (eq == std::string::npos) continue;
            std::string key = body.substr(0, eq);
            std::string value = body.substr(eq + 1);
            key.erase(0, key.find_first_not_of(' '));
            key.erase(key.find_last_not_of(' ') + 1);
            value.erase(0, value.find_first_not_of(' '));
            value.erase(value.find_last_not_of(' ') + 1);
            if (key == "c_treat") pop.c_treat = parse_double_exact(value);
            else if (key == "ste_target") pop.ste_target = parse_double_exact(value);
            else if (key == "achieved_ste") pop.achieved_ste = parse_double_exact(value);
            else if (key == "seed") pop.seed = std::stoull(value);
            else if (key == "mediator_gamma") pop.env.mediator_gamma = parse_double_exact(value);
            else if (key == "burn_in_steps") pop.env.burn_in_steps = std::stoi(value);
            continue;
        }
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (!header_seen) {
            if (!version_seen)
                throw ConfigError("population file: missing version line");
            const auto& cols = detail::population_columns();
            if (fields != cols)
                throw ConfigError("population file: header does not match the v1 schema");
            header_seen = true;
            continue;
        }
        if (fields.size() != detail::population_columns().size())
            throw ConfigError("population file: wrong number of columns in a data row");
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) row.push_back(parse_double_exact(f));
        pop.dyads.push_back(detail::dyad_from_row(row));
    }
    if (!header_seen) throw ConfigError("population file: no header row");
    if (pop.dyads.empty()) throw ConfigError("population file: no dyads");
    return pop;
}

inline void write_population_file(const std::filesystem::path& path, const Population& pop) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("io: cannot write " + path.string());
    out << population_to_text(pop);
}

inline Population read_population_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("io: cannot read " + path.string());
    return population_from_text(in);
}

// ---------------------------------------------------------------------------
// Curve CSVs and run manifests.
// ---------------------------------------------------------------------------

inline std::string curve_to_csv(const ImprovementCurve& curve) {
    std::ostringstream os;
    os << "dyad_index,mean_improvement,sd,n_runs\n";
    for (std::size_t k = 0; k < curve.mean.size(); ++k)
        os << (k + 1) << ',' << format_double(curve.mean[k]) << ',' << format_double(curve.sd[k])
           << ',' << curve.n_runs << "\n";
    return os.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("io: cannot write " + path.string());
    out << text;
}

struct Manifest {
    std::string command;
    std::string config_hash;
    std::uint64_t master_seed = 0;
    std::map<std::string, std::string> entries;  // ordered, reproducible
};

inline std::string manifest_to_text(const Manifest& m) {
    std::ostringstream os;
    os << "artifact = dyadrl\n";
    os << "format = 1\n";
    os << "command = " << m.command << "\n";
    os << "config_hash = " << m.config_hash << "\n";
    os << "master_seed = " << m.master_seed << "\n";
    for (const auto& [k, v] : m.entries) os << k << " = " << v << "\n";
    return os.str();
}

}  // namespace dyadrl
