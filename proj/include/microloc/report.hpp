#pragma once

// Report types shared by the estimate checkers: fitted exponents, prefactor
// nets with their slow-scale verdicts, pass/fail flags, and worst-sample
// witnesses. Every verdict is a statement about the sampled grids; the
// tolerances in force are part of the report.

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "microloc/epsnet.hpp"

namespace microloc {

struct Witness {
    std::vector<double> x;
    std::vector<double> xi;
    double eps = 0;
    double value = 0;
    std::string what;

    nlohmann::json to_json() const {
        return {{"x", x}, {"xi", xi}, {"eps", eps}, {"value", value}, {"what", what}};
    }
};

struct PrefactorNet {
    std::string label;
    std::vector<double> eps;
    std::vector<double> values;
    NetClass cls = NetClass::Moderate;
    double kappa_hat = 0;
    double sup_value = 0;

    nlohmann::json to_json() const {
        return {{"label", label},        {"eps", eps},
                {"values", values},      {"class", std::string(to_string(cls))},
                {"kappa_hat", kappa_hat}, {"sup", sup_value}};
    }
};

struct ConditionReport {
    std::string condition; // mh1, mh2, wh, first_order, st1, st2, inv, ...
    bool pass = false;
    std::map<std::string, double> fitted;     // q_hat, m0_hat, rho_hat, ...
    std::map<std::string, double> tolerances; // every threshold in force
    std::vector<PrefactorNet> nets;
    std::vector<Witness> witnesses;
    std::string notes; // always labeled a numerical verdict on sampled grids

    nlohmann::json to_json() const {
        nlohmann::json jn = nlohmann::json::array(), jw = nlohmann::json::array();
        for (const auto& n : nets) jn.push_back(n.to_json());
        for (const auto& w : witnesses) jw.push_back(w.to_json());
        return {{"condition", condition}, {"pass", pass},   {"fitted", fitted},
                {"tolerances", tolerances}, {"nets", jn},   {"witnesses", jw},
                {"notes", notes}};
    }
};

struct AssumptionVerdict {
    std::string which; // "R" or "psi"
    bool pass = false;
    double tau_hat = 0;            // R: fitted xi-decay rate per application
    double tau0_hat = 0;           // psi: intercept of exponent vs |alpha|
    double delta_hat = 0;          // psi: slope of exponent vs |alpha|
    std::map<int, double> M_hat;   // per N (R) or per |alpha| (psi)
    std::map<int, double> radial_slope; // informative median slope per N / |alpha|
    std::map<std::string, double> tolerances;
    std::vector<Witness> witnesses;
    std::string notes;

    nlohmann::json to_json() const {
        nlohmann::json jm = nlohmann::json::object(), js = nlohmann::json::object(),
                       jw = nlohmann::json::array();
        for (const auto& [k, v] : M_hat) jm[std::to_string(k)] = v;
        for (const auto& [k, v] : radial_slope) js[std::to_string(k)] = v;
        for (const auto& w : witnesses) jw.push_back(w.to_json());
        return {{"which", which},         {"pass", pass},
                {"tau_hat", tau_hat},     {"tau0_hat", tau0_hat},
                {"delta_hat", delta_hat}, {"M_hat", jm},
                {"radial_slope", js},     {"tolerances", tolerances},
                {"witnesses", jw},        {"notes", notes}};
    }
};

} // namespace microloc
