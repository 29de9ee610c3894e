#include "sme/model_io.hpp"

#include "sme/error.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace sme {
namespace {

using nlohmann::json;

void require_keys(const json& j, const std::set<std::string>& allowed, const std::set<std::string>& required,
                  const std::string& where) {
    if (!j.is_object()) throw ParseError(where + ": expected an object");
    for (const auto& [key, _] : j.items()) {
        if (!allowed.contains(key)) throw ParseError(where + ": unknown field '" + key + "'");
    }
    for (const auto& key : required) {
        if (!j.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
    }
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ParseError(where + ": expected a number");
    return j.get<double>();
}

std::size_t one_based(std::string_view s, const std::string& where) {
    std::size_t v = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || v == 0) throw ParseError(where + ": bad index '" + std::string(s) + "'");
    return v - 1;
}

std::pair<std::size_t, std::size_t> index_pair(const std::string& key, const std::string& where) {
    const auto comma = key.find(',');
    if (comma == std::string::npos) throw ParseError(where + ": expected \"i,j\", got '" + key + "'");
    return {one_based(std::string_view(key).substr(0, comma), where),
            one_based(std::string_view(key).substr(comma + 1), where)};
}

std::string pair_key(std::size_t a, std::size_t b) {
    return std::to_string(a + 1) + "," + std::to_string(b + 1);
}

}  // namespace

json to_json(const MixedErlang& d) {
    return {{"beta", d.scale()}, {"weights", std::vector<double>(d.weights().begin(), d.weights().end())}};
}

MixedErlang mixed_erlang_from_json(const json& j) {
    require_keys(j, {"beta", "weights"}, {"beta", "weights"}, "marginal");
    const double beta = number(j["beta"], "marginal.beta");
    if (!j["weights"].is_array() || j["weights"].empty()) throw ParseError("marginal.weights: expected a nonempty array");
    std::vector<double> w;
    for (const auto& v : j["weights"]) w.push_back(number(v, "marginal.weights"));
    return MixedErlang(beta, std::move(w));
}

json to_json(const SarmanovModel& m) {
    json out;
    out["schema_version"] = kModelSchemaVersion;
    json ports = json::array();
    for (const auto& p : m.portfolios()) {
        json list = json::array();
        for (const auto& d : p) list.push_back(to_json(d));
        ports.push_back(std::move(list));
    }
    out["portfolios"] = std::move(ports);

    json within = json::object();
    json cross = json::object();
    for (const auto& c : m.couplings()) {
        const RiskId a = m.risk_id(c.i), b = m.risk_id(c.j);
        if (a.portfolio == b.portfolio) {
            within[std::to_string(a.portfolio + 1)][pair_key(a.index, b.index)] = c.alpha;
            continue;
        }
        const std::string key = pair_key(a.portfolio, b.portfolio);
        if (!cross.contains(key)) {
            json rows = json::array();
            for (std::size_t s = 0; s < m.portfolio_size(a.portfolio); ++s) {
                rows.push_back(std::vector<double>(m.portfolio_size(b.portfolio), 0.0));
            }
            cross[key] = std::move(rows);
        }
        cross[key][a.index][b.index] = c.alpha;
    }
    out["alpha_within"] = std::move(within);
    out["alpha_cross"] = std::move(cross);
    out["deductibles"] = m.deductibles() ? json(*m.deductibles()) : json(nullptr);
    const auto& s = m.settings();
    out["settings"] = {{"series_epsilon", s.series_epsilon},
                       {"max_terms", s.max_terms},
                       {"quantile_tolerance", s.quantile_tolerance},
                       {"reinsured_tolerance", s.reinsured_tolerance}};
    return out;
}

SarmanovModel model_from_json(const json& j) {
    require_keys(j, {"schema_version", "portfolios", "alpha_within", "alpha_cross", "deductibles", "settings"},
                 {"schema_version", "portfolios"}, "model");
    if (!j["schema_version"].is_number_integer() || j["schema_version"].get<int>() != kModelSchemaVersion) {
        throw ParseError("model.schema_version: expected " + std::to_string(kModelSchemaVersion));
    }
    const auto& pj = j["portfolios"];
    if (!pj.is_array() || pj.empty()) throw ParseError("model.portfolios: expected a nonempty array");
    std::vector<std::vector<MixedErlang>> portfolios;
    for (const auto& list : pj) {
        if (!list.is_array() || list.empty()) throw ParseError("model.portfolios: each portfolio must be a nonempty array");
        std::vector<MixedErlang> p;
        for (const auto& d : list) p.push_back(mixed_erlang_from_json(d));
        portfolios.push_back(std::move(p));
    }
    const std::size_t n = portfolios.size();

    std::vector<PairCoefficient> pairs;
    if (j.contains("alpha_within")) {
        const auto& w = j["alpha_within"];
        if (!w.is_object()) throw ParseError("model.alpha_within: expected an object");
        for (const auto& [pkey, entries] : w.items()) {
            const std::size_t a = one_based(pkey, "model.alpha_within");
            if (a >= n) throw ParseError("model.alpha_within: no portfolio " + pkey);
            if (!entries.is_object()) throw ParseError("model.alpha_within." + pkey + ": expected an object");
            for (const auto& [key, value] : entries.items()) {
                const auto [s, t] = index_pair(key, "model.alpha_within." + pkey);
                if (s >= t) throw ParseError("model.alpha_within." + pkey + ": need s < t in '" + key + "'");
                if (t >= portfolios[a].size()) throw ParseError("model.alpha_within." + pkey + ": no risk in '" + key + "'");
                pairs.push_back({{a, s}, {a, t}, number(value, "model.alpha_within")});
            }
        }
    }
    if (j.contains("alpha_cross")) {
        const auto& c = j["alpha_cross"];
        if (!c.is_object()) throw ParseError("model.alpha_cross: expected an object");
        for (const auto& [key, matrix] : c.items()) {
            const auto [a, b] = index_pair(key, "model.alpha_cross");
            if (a >= b || b >= n) throw ParseError("model.alpha_cross: bad portfolio pair '" + key + "'");
            const std::string where = "model.alpha_cross." + key;
            if (!matrix.is_array() || matrix.size() != portfolios[a].size()) {
                throw ParseError(where + ": expected " + std::to_string(portfolios[a].size()) + " rows");
            }
            for (std::size_t s = 0; s < matrix.size(); ++s) {
                if (!matrix[s].is_array() || matrix[s].size() != portfolios[b].size()) {
                    throw ParseError(where + ": expected " + std::to_string(portfolios[b].size()) + " columns");
                }
                for (std::size_t t = 0; t < matrix[s].size(); ++t) {
                    const double alpha = number(matrix[s][t], where);
                    if (alpha != 0.0) pairs.push_back({{a, s}, {b, t}, alpha});
                }
            }
        }
    }

    std::optional<std::vector<double>> deductibles;
    if (j.contains("deductibles") && !j["deductibles"].is_null()) {
        const auto& d = j["deductibles"];
        if (!d.is_array() || d.size() != n) throw ParseError("model.deductibles: expected one number per portfolio");
        std::vector<double> v;
        for (const auto& x : d) v.push_back(number(x, "model.deductibles"));
        deductibles = std::move(v);
    }

    NumericSettings settings;
    if (j.contains("settings")) {
        const auto& s = j["settings"];
        require_keys(s, {"series_epsilon", "max_terms", "quantile_tolerance", "reinsured_tolerance"}, {}, "model.settings");
        if (s.contains("series_epsilon")) settings.series_epsilon = number(s["series_epsilon"], "settings.series_epsilon");
        if (s.contains("max_terms")) {
            if (!s["max_terms"].is_number_unsigned()) throw ParseError("settings.max_terms: expected a positive integer");
            settings.max_terms = s["max_terms"].get<std::size_t>();
        }
        if (s.contains("quantile_tolerance")) {
            settings.quantile_tolerance = number(s["quantile_tolerance"], "settings.quantile_tolerance");
        }
        if (s.contains("reinsured_tolerance")) {
            settings.reinsured_tolerance = number(s["reinsured_tolerance"], "settings.reinsured_tolerance");
        }
        if (!(settings.series_epsilon > 0.0) || settings.max_terms == 0 || !(settings.quantile_tolerance > 0.0) ||
            !(settings.reinsured_tolerance > 0.0)) {
            throw ParseError("model.settings: tolerances and term cap must be positive");
        }
    }
    return SarmanovModel(std::move(portfolios), std::move(pairs), std::move(deductibles), settings);
}

SarmanovModel parse_model(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    try {
        return model_from_json(j);
    } catch (const json::exception& e) {
        throw ParseError(std::string("schema violation: ") + e.what());
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        // well-formed file describing an invalid model
        throw ParseError(std::string("invalid model: ") + e.what());
    }
}

SarmanovModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

json to_json(const AllocationReport& r) {
    json units = json::array();
    const auto shares = r.shares();
    for (std::size_t i = 0; i < r.units.size(); ++i) {
        units.push_back({{"unit", r.units[i]}, {"C_j", r.contributions[i]}, {"share", shares[i]}});
    }
    return {{"p", r.p},
            {"VaR", r.var},
            {"TVaR", r.tvar},
            {"contributions", std::move(units)},
            {"additivity_residual", r.additivity_residual},
            {"var_at_atom", r.var_at_atom}};
}

json to_json(const OracleReport& r) {
    json out = json::array();
    for (std::size_t t = 0; t < r.targets.size(); ++t) {
        out.push_back({{"target", r.targets[t].describe()},
                       {"estimate", r.estimates[t].value},
                       {"std_error", r.estimates[t].std_error},
                       {"samples", r.samples},
                       {"seed", r.seed}});
    }
    return out;
}

}  // namespace sme
