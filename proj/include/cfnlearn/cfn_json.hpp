#pragma once

// JSON serialization of cost function networks.
//
// Native layout:
//   {"variables": [d_0, ..., d_{n-1}], "top": T,
//    "unary": {"<i>": [c_0, ...]},
//    "pairs": {"<i>_<j>": [[...], ...]}}       (i < j, row index = value of i)
//
// The toulbar2 layout ("problem"/"variables"/"functions" with flattened cost
// tables) is write-only and meant for cross-checking against that solver.

#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "cfnlearn/cfn.hpp"

namespace cfnlearn {

inline nlohmann::json to_json(const CostFunctionNetwork& net) {
    nlohmann::json j;
    j["variables"] = net.domain_sizes();
    j["top"] = net.top();
    nlohmann::json unary = nlohmann::json::object();
    for (const auto& u : net.unaries()) unary[std::to_string(u.i)] = u.costs;
    j["unary"] = std::move(unary);
    nlohmann::json pairs = nlohmann::json::object();
    for (const auto& m : net.pairs()) {
        nlohmann::json rows = nlohmann::json::array();
        for (int a = 0; a < m.rows(); ++a) {
            nlohmann::json row = nlohmann::json::array();
            for (int b = 0; b < m.cols(); ++b) row.push_back(m(a, b));
            rows.push_back(std::move(row));
        }
        pairs[std::to_string(m.i()) + "_" + std::to_string(m.j())] = std::move(rows);
    }
    j["pairs"] = std::move(pairs);
    return j;
}

namespace detail {

inline int parse_index(const std::string& s, const std::string& context) {
    std::size_t used = 0;
    int v = -1;
    try {
        v = std::stoi(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || v < 0) throw ParseError("bad variable index '" + s + "' in " + context);
    return v;
}

} // namespace detail

inline CostFunctionNetwork network_from_json(const nlohmann::json& j) {
    try {
        if (!j.is_object() || !j.contains("variables")) throw ParseError("network JSON needs a 'variables' array");
        const auto domains = j.at("variables").get<std::vector<int>>();
        const Cost top = j.contains("top") ? j.at("top").get<Cost>() : kDefaultTop;
        CostFunctionNetwork net(domains, top);
        if (j.contains("unary")) {
            for (const auto& [key, costs] : j.at("unary").items()) {
                const int i = detail::parse_index(key, "unary");
                net.add_unary(i, costs.get<std::vector<Cost>>());
            }
        }
        if (j.contains("pairs")) {
            for (const auto& [key, rows] : j.at("pairs").items()) {
                const auto sep = key.find('_');
                if (sep == std::string::npos) throw ParseError("pair key '" + key + "' is not of the form i_j");
                const int a = detail::parse_index(key.substr(0, sep), "pair key");
                const int b = detail::parse_index(key.substr(sep + 1), "pair key");
                if (a >= b) throw ParseError("pair key '" + key + "' must satisfy i < j");
                net.set_pair(a, b, rows.get<std::vector<std::vector<Cost>>>());
            }
        }
        return net;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed network JSON: ") + e.what());
    } catch (const StructuralError& e) {
        throw ParseError(std::string("invalid network: ") + e.what());
    }
}

inline nlohmann::json to_toulbar2_json(const CostFunctionNetwork& net, const std::string& name = "cfn") {
    auto var = [](int i) { return "x" + std::to_string(i); };
    std::ostringstream ub;
    ub.precision(17);
    ub << "<" << net.top();
    nlohmann::json j;
    j["problem"] = {{"name", name}, {"mustbe", ub.str()}};
    nlohmann::json vars = nlohmann::json::object();
    for (int i = 0; i < net.size(); ++i) vars[var(i)] = net.domain_size(i);
    j["variables"] = std::move(vars);
    nlohmann::json fns = nlohmann::json::object();
    for (const auto& u : net.unaries()) fns["u" + std::to_string(u.i)] = {{"scope", {var(u.i)}}, {"costs", u.costs}};
    for (const auto& m : net.pairs()) {
        std::vector<Cost> flat(m.values().begin(), m.values().end());
        fns["f" + std::to_string(m.i()) + "_" + std::to_string(m.j())] = {{"scope", {var(m.i()), var(m.j())}},
                                                                          {"costs", flat}};
    }
    j["functions"] = std::move(fns);
    return j;
}

inline CostFunctionNetwork load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return network_from_json(j);
}

inline void save_network(const CostFunctionNetwork& net, const std::string& path, bool toulbar2_format = false) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);
    out << (toulbar2_format ? to_toulbar2_json(net) : to_json(net)).dump(1) << '\n';
}

} // namespace cfnlearn
