#include "lrsm/io.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace lrsm {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

const char* thinning_name(Thinning t) {
    switch (t) {
        case Thinning::Binomial: return "binomial";
        case Thinning::NegativeBinomial: return "negative-binomial";
        case Thinning::Poisson: return "poisson";
    }
    return "?";
}

const char* innovation_name(Innovation i) {
    return i == Innovation::Poisson ? "poisson" : "geometric";
}

const char* method_name(CiMethod m) {
    switch (m) {
        case CiMethod::Approx: return "approx";
        case CiMethod::PBA: return "pba";
        case CiMethod::BBA: return "bba";
    }
    return "?";
}

json cps_to_json(const ChangePointSet& cps) {
    return json{{"taus", cps.taus}, {"scores", cps.scores}, {"radii", cps.radii}};
}

ChangePointSet cps_from_json(const json& j) {
    ChangePointSet cps;
    cps.taus = j.at("taus").get<std::vector<index_t>>();
    cps.scores = j.value("scores", std::vector<double>{});
    cps.radii = j.value("radii", std::vector<index_t>{});
    return cps;
}

}  // namespace

CountSeries read_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open input file: " + path);
    std::vector<count_t> values;
    std::string line;
    bool first = true;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string tok = trim(line);
        if (tok.empty()) continue;
        if (first && (tok == "x" || tok == "X")) {
            first = false;
            continue;
        }
        first = false;
        char* end = nullptr;
        errno = 0;
        const long long v = std::strtoll(tok.c_str(), &end, 10);
        if (end != tok.c_str() + tok.size() || errno != 0)
            throw InputError("line " + std::to_string(lineno) + ": not an integer: '" + tok + "'");
        if (v < 0)
            throw InputError("line " + std::to_string(lineno) + ": negative count: '" + tok + "'");
        values.push_back(static_cast<count_t>(v));
    }
    if (values.empty()) throw InputError("no observations in " + path);
    return CountSeries(std::move(values));
}

void write_series_csv(const std::string& path, const CountSeries& series) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write output file: " + path);
    out << "x\n";
    for (index_t t = 1; t <= series.n(); ++t) out << series.at(t) << "\n";
    if (!out) throw InputError("short write to " + path);
}

json params_to_json(const GcinarParams& params) {
    return json{{"beta0", params.beta0}, {"betas", params.betas}};
}

GcinarParams params_from_json(const json& j) {
    GcinarParams p;
    p.beta0 = j.at("beta0").get<double>();
    p.betas = j.at("betas").get<std::vector<double>>();
    return p;
}

json estimate_to_json(const LrsmEstimate& est) {
    json params = json::array();
    for (const GcinarParams& p : est.params) params.push_back(params_to_json(p));
    return json{{"schema_version", kSchemaVersion},
                {"n", est.n},
                {"m_hat", est.m_hat},
                {"taus", est.taus.taus},
                {"scores", est.taus.scores},
                {"radii", est.taus.radii},
                {"orders", est.orders},
                {"params", params},
                {"se", est.se},
                {"segment_loglik", est.seg_loglik},
                {"mdl", est.mdl},
                {"stage1", cps_to_json(est.stage1)},
                {"stage2", cps_to_json(est.stage2)}};
}

LrsmEstimate estimate_from_json(const json& j) {
    if (j.value("schema_version", 0) != kSchemaVersion)
        throw InputError("estimate report has an unsupported schema_version");
    LrsmEstimate est;
    est.n = j.at("n").get<index_t>();
    est.m_hat = j.at("m_hat").get<index_t>();
    est.taus.taus = j.at("taus").get<std::vector<index_t>>();
    est.taus.scores = j.value("scores", std::vector<double>{});
    est.taus.radii = j.value("radii", std::vector<index_t>{});
    est.orders = j.at("orders").get<std::vector<int>>();
    for (const json& p : j.at("params")) est.params.push_back(params_from_json(p));
    est.se = j.value("se", std::vector<std::vector<double>>{});
    est.seg_loglik = j.value("segment_loglik", std::vector<double>{});
    est.mdl = j.value("mdl", 0.0);
    if (j.contains("stage1")) est.stage1 = cps_from_json(j.at("stage1"));
    if (j.contains("stage2")) est.stage2 = cps_from_json(j.at("stage2"));
    est.taus.validate(est.n);
    if (est.orders.size() != est.params.size() ||
        est.orders.size() != est.taus.taus.size() + 1)
        throw InputError("estimate report is inconsistent");
    for (const GcinarParams& p : est.params) p.validate();
    return est;
}

json ci_to_json(const CiResult& ci) {
    json j{{"method", method_name(ci.method)},
           {"lower", ci.lower},
           {"upper", ci.upper},
           {"alpha", ci.alpha}};
    if (ci.method == CiMethod::Approx) j["delta_hat"] = ci.delta_hat;
    if (ci.method == CiMethod::PBA) j["n_p"] = ci.half;
    if (ci.method == CiMethod::BBA) j["n_b"] = ci.half;
    if (ci.method != CiMethod::Approx) j["B"] = ci.draws;
    return j;
}

json truth_to_json(const McpSpec& spec, std::uint64_t seed) {
    json segs = json::array();
    for (const SegmentSpec& s : spec.segments)
        segs.push_back(json{{"beta0", s.params.beta0},
                            {"betas", s.params.betas},
                            {"thinning", thinning_name(s.thinning)},
                            {"innovation", innovation_name(s.innovation)}});
    return json{{"schema_version", kSchemaVersion},
                {"n", spec.n},
                {"taus", spec.taus.taus},
                {"segments", segs},
                {"seed", seed}};
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write output file: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw InputError("short write to " + path);
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open input file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw InputError(std::string("invalid JSON in ") + path + ": " + e.what());
    }
    return j;
}

}  // namespace lrsm
