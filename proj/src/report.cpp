#include "shl0/report.hpp"

#include <cstdio>
#include <fstream>

#include "shl0/errors.hpp"
#include "shl0/tuning.hpp"

namespace shl0 {

using nlohmann::json;

json model_to_json(const ModelAlpha& alpha) {
    json j;
    j["mains"] = alpha.mains();
    j["interactions"] = json::array();
    for (const auto& [a, b] : alpha.interactions()) j["interactions"].push_back({a, b});
    return j;
}

json selection_to_json(const SelectionResult<double>& sel, const Dataset<double>& data,
                       double null_deviance, double kappa_value) {
    json j;
    j["lambda"] = sel.lambda;
    j["kappa"] = kappa_value;
    j["objective"] = sel.objective;
    j["rounds"] = sel.rounds_run;
    j["model"] = model_to_json(sel.alpha_hat);
    j["strong_hierarchy"] = check_strong_hierarchy(sel.alpha_hat);

    json mains = json::array();
    const auto& mlist = sel.alpha_hat.mains();
    for (std::size_t i = 0; i < mlist.size(); ++i) {
        mains.push_back({{"index", mlist[i]},
                         {"name", data.name(mlist[i])},
                         {"coefficient", sel.fit.beta_main[static_cast<Eigen::Index>(i)]}});
    }
    json inters = json::array();
    const auto& ilist = sel.alpha_hat.interactions();
    for (std::size_t i = 0; i < ilist.size(); ++i) {
        inters.push_back({{"i", ilist[i].first},
                          {"j", ilist[i].second},
                          {"name", data.name(ilist[i].first) + "*" + data.name(ilist[i].second)},
                          {"coefficient", sel.fit.beta_inter[static_cast<Eigen::Index>(i)]}});
    }
    j["coefficients"] = {{"intercept", sel.fit.beta0}, {"mains", mains}, {"interactions", inters}};

    j["fit"] = {{"loglik", sel.fit.loglik},
                {"deviance", sel.fit.deviance},
                {"null_deviance", null_deviance},
                {"deviance_explained",
                 null_deviance > 0 ? (null_deviance - sel.fit.deviance) / null_deviance : 0.0},
                {"phi", sel.fit.phi_hat},
                {"df", sel.fit.df},
                {"gic", gic(sel.fit, kappa_value)},
                {"converged", sel.fit.converged}};

    j["screen_sets"] = sel.screen_sets;
    json restarts = json::array();
    for (const auto& r : sel.restarts) {
        restarts.push_back({{"round", r.round},
                            {"restart", r.index},
                            {"objective", r.failed ? json() : json(r.objective)},
                            {"converged", r.converged},
                            {"accepted_moves", r.trace.size()},
                            {"failed", r.failed}});
    }
    j["restarts"] = restarts;
    return j;
}

json screen_to_json(const ScreenResult<double>& sr, const Dataset<double>& data, int top) {
    json j;
    j["method"] = sr.method == ScreenMethod::Assis ? "assis" : "alrsis";
    j["d_gamma"] = sr.d_gamma;
    j["base"] = model_to_json(sr.base_alpha);
    j["shrunk"] = sr.shrunk;
    j["failed_fits"] = sr.failed_fits;
    json stats = json::array();
    const std::size_t limit =
        top > 0 ? std::min<std::size_t>(sr.stats.size(), static_cast<std::size_t>(top))
                : sr.stats.size();
    for (std::size_t i = 0; i < limit; ++i) {
        const auto& [idx, value] = sr.stats[i];
        const int partner = sr.best_partner.empty() ? 0 : sr.best_partner[i].second;
        stats.push_back({{"index", idx},
                         {"name", data.name(idx)},
                         {"statistic", value},
                         {"best_partner", partner},
                         {"selected", sr.in_shrunk(idx)}});
    }
    j["statistics"] = stats;
    return j;
}

json sim_report_to_json(const SimReport& report) {
    const SimConfig& c = report.config;
    json j;
    j["schema_version"] = 1;
    j["command"] = "simulate";
    j["config"] = {{"model", c.model == SimModel::Linear ? "linear" : "logistic"},
                   {"case", std::string(1, sim_case_label(c.scase))},
                   {"n", c.resolved_n()},
                   {"p", c.resolved_p()},
                   {"rho", c.rho},
                   {"replications", c.replications},
                   {"seed", c.seed},
                   {"kappa_rule", c.kappa_rule.name()},
                   {"gamma", c.gamma},
                   {"restarts", c.restarts},
                   {"rounds", c.rounds}};
    j["lambda"] = report.lambda;
    j["kappa"] = report.kappa;
    j["aggregate"] = {{"tp_main_pct", report.tp_main_pct},
                      {"tp_inter_pct", report.tp_inter_pct},
                      {"fp_main_mean", report.fp_main_mean},
                      {"fp_inter_mean", report.fp_inter_mean},
                      {"sh_violation_pct", report.sh_violation_pct},
                      {"screen_cover_pct", report.screen_cover_pct},
                      {"failures", report.failures}};
    json reps = json::array();
    for (const auto& r : report.per_replication) {
        json rec = {{"replication", r.index},
                    {"alpha_hat", model_to_json(r.alpha_hat)},
                    {"alpha_star", model_to_json(r.alpha_star)},
                    {"tp_main", r.metrics.tp_main},
                    {"fp_main", r.metrics.fp_main},
                    {"tp_inter", r.metrics.tp_inter},
                    {"fp_inter", r.metrics.fp_inter},
                    {"sh_ok", r.metrics.sh_ok},
                    {"screen_round1_covers_truth", r.screen_round1_covers_truth},
                    {"failed", r.failed}};
        if (r.failed) rec["error"] = r.error;
        reps.push_back(std::move(rec));
    }
    j["replications"] = reps;
    return j;
}

std::string sim_report_table(const SimReport& report) {
    const SimConfig& c = report.config;
    char buf[256];
    std::string s;
    std::snprintf(buf, sizeof(buf), "model=%s case=%c rho=%.2f n=%d p=%d reps=%d lambda=%.6f\n",
                  c.model == SimModel::Linear ? "linear" : "logistic", sim_case_label(c.scase),
                  c.rho, c.resolved_n(), c.resolved_p(), c.replications, report.lambda);
    s += buf;
    s += "            TP (%)      FP (#)\n";
    std::snprintf(buf, sizeof(buf), "mains      %7.2f    %8.3f\n", report.tp_main_pct,
                  report.fp_main_mean);
    s += buf;
    std::snprintf(buf, sizeof(buf), "inters     %7.2f    %8.3f\n", report.tp_inter_pct,
                  report.fp_inter_mean);
    s += buf;
    std::snprintf(buf, sizeof(buf), "SH violations: %.1f%%   screen cover: %.1f%%   failures: %d\n",
                  report.sh_violation_pct, report.screen_cover_pct, report.failures);
    s += buf;
    std::snprintf(buf, sizeof(buf), "mean runtime per replication: %.3f s\n",
                  report.mean_runtime_seconds);
    s += buf;
    return s;
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

}  // namespace shl0
