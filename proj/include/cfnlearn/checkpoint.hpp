#pragma once

// Checkpoint files: MLP configuration, parameters, Adam state, RNG state and a
// free-form metadata object, stored as JSON. Doubles are written in shortest
// round-trip form, so save/load is bit-exact.

#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "cfnlearn/mlp.hpp"

namespace cfnlearn {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
    MlpConfig mlp;
    ParamStore<double> params;
    std::string rng_state;   ///< textual mt19937_64 state
    nlohmann::json metadata = nlohmann::json::object();

    friend bool operator==(const Checkpoint& a, const Checkpoint& b) {
        return a.mlp == b.mlp && a.params == b.params && a.rng_state == b.rng_state && a.metadata == b.metadata;
    }
};

inline std::string rng_state_string(const Rng& rng) {
    std::ostringstream os;
    os << rng.engine();
    return os.str();
}

inline void restore_rng_state(Rng& rng, const std::string& state) {
    std::istringstream is(state);
    is >> rng.engine();
    if (!is) throw ParseError("invalid RNG state in checkpoint");
}

inline nlohmann::json to_json(const Checkpoint& ck) {
    nlohmann::json j;
    j["format"] = "cfnlearn-checkpoint";
    j["version"] = kCheckpointVersion;
    j["mlp"] = {{"input_dim", ck.mlp.input_dim},
                {"hidden_width", ck.mlp.hidden_width},
                {"hidden_layers", ck.mlp.hidden_layers},
                {"residual_period", ck.mlp.residual_period},
                {"output_dim", ck.mlp.output_dim}};
    j["params"] = ck.params.values;
    j["adam_m"] = ck.params.first_moment;
    j["adam_v"] = ck.params.second_moment;
    j["step"] = ck.params.step;
    j["rng"] = ck.rng_state;
    j["metadata"] = ck.metadata;
    return j;
}

inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
    try {
        if (j.value("format", "") != "cfnlearn-checkpoint") throw ParseError("not a cfnlearn checkpoint");
        if (j.at("version").get<int>() != kCheckpointVersion)
            throw ParseError("unsupported checkpoint version " + j.at("version").dump());
        Checkpoint ck;
        const auto& m = j.at("mlp");
        ck.mlp = {m.at("input_dim").get<int>(), m.at("hidden_width").get<int>(), m.at("hidden_layers").get<int>(),
                  m.at("residual_period").get<int>(), m.at("output_dim").get<int>()};
        const Mlp<double> net(ck.mlp);
        ck.params = net.zeros();
        ck.params.values = j.at("params").get<std::vector<double>>();
        ck.params.first_moment = j.at("adam_m").get<std::vector<double>>();
        ck.params.second_moment = j.at("adam_v").get<std::vector<double>>();
        ck.params.step = j.at("step").get<std::uint64_t>();
        if (ck.params.values.size() != net.parameter_count() ||
            ck.params.first_moment.size() != net.parameter_count() ||
            ck.params.second_moment.size() != net.parameter_count())
            throw ParseError("checkpoint tensor sizes do not match its MLP configuration");
        ck.rng_state = j.value("rng", "");
        ck.metadata = j.value("metadata", nlohmann::json::object());
        return ck;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed checkpoint: ") + e.what());
    } catch (const StructuralError& e) {
        throw ParseError(std::string("invalid checkpoint: ") + e.what());
    }
}

inline void save_checkpoint(const Checkpoint& ck, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);
    out << to_json(ck).dump() << '\n';
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return checkpoint_from_json(j);
}

} // namespace cfnlearn
