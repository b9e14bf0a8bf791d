#include "shl0/cli.hpp"

#include <CLI11.hpp>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "shl0/csv.hpp"
#include "shl0/report.hpp"
#include "shl0/search.hpp"
#include "shl0/sim.hpp"
#include "shl0/tuning.hpp"

namespace shl0 {

namespace {

struct CommonOpts {
    std::string data_path;
    std::string response;
    std::string trials;
    std::string family = "gaussian";
    std::string kappa_rule = "auto";
    std::string method = "assis";
    double gamma = 0.0;
    double lambda = 0.0;
    int restarts = 10;
    int rounds = 2;
    std::uint64_t seed = 0;
    int cap = 0;
    int threads = 1;
    std::string out_path;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_selection) {
    cmd->add_option("--data", o.data_path, "input CSV file")->required();
    cmd->add_option("--response", o.response, "response column name")->required();
    cmd->add_option("--trials", o.trials, "binomial trials column name");
    cmd->add_option("--family", o.family, "gaussian|binomial|poisson");
    cmd->add_option("--gamma", o.gamma, "screening fraction (default 1/log n)");
    cmd->add_option("--method", o.method, "screening method: assis|alrsis");
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_option("--threads", o.threads, "worker cap (simulate only)");
    cmd->add_option("--out", o.out_path, "write the JSON report here");
    if (with_selection) {
        cmd->add_option("--kappa", o.kappa_rule, "bic|hbic4|ebic|<value> (default: regime-based)");
        cmd->add_option("--lambda", o.lambda, "penalty level; overrides --kappa");
        cmd->add_option("--restarts", o.restarts, "search restarts per round");
        cmd->add_option("--rounds", o.rounds, "screen+search rounds");
        cmd->add_option("--K", o.cap, "model size cap (default floor(n/2))");
    }
}

Family<double> make_family(const CommonOpts& o, const IngestResult& ingest) {
    if (o.family == "gaussian") return Family<double>::gaussian();
    if (o.family == "poisson") return Family<double>::poisson();
    if (o.family == "binomial") {
        if (ingest.trials.size() > 0) return Family<double>::binomial(ingest.trials);
        return Family<double>::binomial(static_cast<Eigen::Index>(ingest.data.n()));
    }
    throw ConfigError("unknown family '" + o.family + "' (gaussian|binomial|poisson)");
}

KappaRule make_kappa_rule(const std::string& text, int n, int p) {
    if (text == "auto") return KappaRule::auto_rule(n, p);
    if (text == "bic") return KappaRule::bic();
    if (text == "hbic4") return KappaRule::hbic4();
    if (text == "ebic") return KappaRule::ebic();
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0')
        throw ConfigError("unknown kappa rule '" + text + "' (bic|hbic4|ebic|<value>)");
    return KappaRule::custom(v);
}

ScreenMethod make_method(const std::string& text) {
    if (text == "assis") return ScreenMethod::Assis;
    if (text == "alrsis") return ScreenMethod::Alrsis;
    throw ConfigError("unknown screening method '" + text + "' (assis|alrsis)");
}

void emit(const nlohmann::json& j, const std::string& out_path) {
    if (out_path.empty())
        std::cout << j.dump(2) << "\n";
    else
        write_json_file(out_path, j);
}

int cmd_fit(const CommonOpts& o) {
    IngestResult ingest = ingest_csv(o.data_path, o.response, o.trials);
    const Dataset<double>& data = ingest.data;
    Family<double> family = make_family(o, ingest);

    double lambda = o.lambda;
    double kappa_value;
    std::string rule_name;
    if (lambda > 0) {
        kappa_value = lambda * data.n();
        rule_name = "lambda-override";
    } else {
        KappaRule rule = make_kappa_rule(o.kappa_rule, data.n(), data.p());
        kappa_value = kappa(rule, data.n(), data.p());
        lambda = lambda_closed_form(kappa_value, data.n());
        rule_name = rule.name();
    }

    SelectConfig<double> sc;
    sc.restarts = o.restarts;
    sc.rounds = o.rounds;
    sc.gamma = o.gamma;
    sc.seed = o.seed;
    sc.max_model_size = o.cap;
    sc.screen_method = make_method(o.method);
    SelectionResult<double> sel = select(family, data, lambda, sc);

    FitResult<double> null_fit = fit_mle(family, data, ModelAlpha{});

    nlohmann::json j;
    j["schema_version"] = 1;
    j["command"] = "fit";
    j["config"] = {{"data", o.data_path},     {"response", o.response},
                   {"trials", o.trials},      {"family", o.family},
                   {"kappa_rule", rule_name}, {"gamma", o.gamma},
                   {"restarts", o.restarts},  {"rounds", o.rounds},
                   {"seed", o.seed},          {"method", o.method}};
    j["data"] = {{"n", data.n()}, {"p", data.p()}, {"dropped_columns", ingest.dropped}};
    j["selection"] = selection_to_json(sel, data, null_fit.deviance, kappa_value);
    emit(j, o.out_path);

    std::ostream& os = std::cerr;
    os << "selected " << sel.alpha_hat.mains().size() << " main effect(s), "
       << sel.alpha_hat.interactions().size() << " interaction(s)\n";
    for (std::size_t i = 0; i < sel.alpha_hat.mains().size(); ++i)
        os << "  " << data.name(sel.alpha_hat.mains()[i]) << " = "
           << sel.fit.beta_main[static_cast<Eigen::Index>(i)] << "\n";
    for (std::size_t i = 0; i < sel.alpha_hat.interactions().size(); ++i) {
        const auto& [a, b] = sel.alpha_hat.interactions()[i];
        os << "  " << data.name(a) << "*" << data.name(b) << " = "
           << sel.fit.beta_inter[static_cast<Eigen::Index>(i)] << "\n";
    }
    os << "deviance " << sel.fit.deviance << " of null " << null_fit.deviance << " ("
       << (null_fit.deviance > 0
               ? 100.0 * (null_fit.deviance - sel.fit.deviance) / null_fit.deviance
               : 0.0)
       << "% explained), GIC " << gic(sel.fit, kappa_value) << "\n";
    return 0;
}

int cmd_screen(const CommonOpts& o) {
    IngestResult ingest = ingest_csv(o.data_path, o.response, o.trials);
    const Dataset<double>& data = ingest.data;
    Family<double> family = make_family(o, ingest);
    const double gamma = o.gamma > 0 ? o.gamma : 1.0 / std::log(double(data.n()));

    ScreenResult<double> sr =
        screen(family, data, ModelAlpha{}, gamma, make_method(o.method));

    nlohmann::json j;
    j["schema_version"] = 1;
    j["command"] = "screen";
    j["config"] = {{"data", o.data_path},
                   {"response", o.response},
                   {"family", o.family},
                   {"gamma", gamma},
                   {"method", o.method}};
    j["data"] = {{"n", data.n()}, {"p", data.p()}, {"dropped_columns", ingest.dropped}};
    j["screen"] = screen_to_json(sr, data);
    emit(j, o.out_path);

    std::cerr << "kept " << sr.shrunk.size() << " of " << data.p() << " variables (d_gamma "
              << sr.d_gamma << ")\n";
    return 0;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

SimConfig parse_sim_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    SimConfig cfg;
    cfg.kappa_rule = KappaRule::ebic();
    std::string kappa_text;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "model") {
                if (value == "linear")
                    cfg.model = SimModel::Linear;
                else if (value == "logistic")
                    cfg.model = SimModel::Logistic;
                else
                    throw ConfigError("model must be one of: linear, logistic");
            } else if (key == "case") {
                if (value == "a")
                    cfg.scase = SimCase::A;
                else if (value == "b")
                    cfg.scase = SimCase::B;
                else if (value == "c")
                    cfg.scase = SimCase::C;
                else
                    throw ConfigError("case must be one of: a, b, c");
            } else if (key == "n") {
                cfg.n = std::stoi(value);
            } else if (key == "p") {
                cfg.p = std::stoi(value);
            } else if (key == "rho") {
                cfg.rho = std::stod(value);
            } else if (key == "replications") {
                cfg.replications = std::stoi(value);
            } else if (key == "seed") {
                cfg.seed = std::stoull(value);
            } else if (key == "kappa") {
                kappa_text = value;
            } else if (key == "gamma") {
                cfg.gamma = std::stod(value);
            } else if (key == "restarts") {
                cfg.restarts = std::stoi(value);
            } else if (key == "rounds") {
                cfg.rounds = std::stoi(value);
            } else if (key == "K") {
                cfg.max_model_size = std::stoi(value);
            } else if (key == "threads") {
                cfg.threads = std::stoi(value);
            } else {
                throw ConfigError("unknown key '" + key +
                                  "' (model, case, n, p, rho, replications, seed, kappa, gamma, "
                                  "restarts, rounds, K, threads)");
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": bad value '" + value +
                              "' for key '" + key + "'");
        }
    }
    // resolved here so a kappa rule may appear before n/p in the file
    if (!kappa_text.empty())
        cfg.kappa_rule = make_kappa_rule(kappa_text, cfg.resolved_n(), cfg.resolved_p());
    return cfg;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 const std::string& table_path, int threads_override) {
    SimConfig cfg = parse_sim_config(config_path);
    if (threads_override > 0) cfg.threads = threads_override;
    cfg.validate();
    SimReport report = run_experiment(cfg);

    const std::string table = sim_report_table(report);
    std::cout << table;
    if (!table_path.empty()) {
        std::ofstream t(table_path);
        if (!t) throw ConfigError("cannot write '" + table_path + "'");
        t << table;
    }
    if (!out_path.empty()) write_json_file(out_path, sim_report_to_json(report));
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"L0-penalized selection of main effects and pairwise interactions "
                 "under strong hierarchy"};
    app.require_subcommand(1);

    CommonOpts fit_opts, screen_opts;
    CLI::App* fit_cmd = app.add_subcommand("fit", "screen + select on a CSV dataset");
    add_common(fit_cmd, fit_opts, true);
    CLI::App* screen_cmd = app.add_subcommand("screen", "screening stage only");
    add_common(screen_cmd, screen_opts, false);

    std::string sim_config, sim_out, sim_table;
    int sim_threads = 0;
    CLI::App* sim_cmd = app.add_subcommand("simulate", "Monte Carlo selection benchmark");
    sim_cmd->add_option("--config", sim_config, "key = value config file")->required();
    sim_cmd->add_option("--out", sim_out, "write the JSON report here");
    sim_cmd->add_option("--table", sim_table, "write the text table here");
    sim_cmd->add_option("--threads", sim_threads, "override the config worker cap");

    try {
        app.parse(argc, argv);
        if (fit_cmd->parsed()) return cmd_fit(fit_opts);
        if (screen_cmd->parsed()) return cmd_screen(screen_opts);
        if (sim_cmd->parsed()) return cmd_simulate(sim_config, sim_out, sim_table, sim_threads);
        return 1;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace shl0
