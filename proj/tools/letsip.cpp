// Command-line front end: mining, sampling, experiments, the IPM baseline,
// the HTTP server and dataset conversion.

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "letsip/baselines.hpp"
#include "letsip/errors.hpp"
#include "letsip/evaluation.hpp"
#include "letsip/learner.hpp"
#include "letsip/sampler.hpp"
#include "letsip/service.hpp"

using namespace letsip;

namespace {

struct DataArgs {
    std::string data;
    std::string labels;
    Support theta = 1;

    void add(CLI::App* app) {
        app->add_option("--data", data, "FIMI .dat file")->required()->check(CLI::ExistingFile);
        app->add_option("--labels", labels, "0/1 label file (default: <data>.labels when present)");
        app->add_option("--theta", theta, "absolute minimum support")->required()->check(CLI::PositiveNumber);
    }

    TransactionDB load() const {
        std::optional<std::filesystem::path> lp;
        if (!labels.empty()) {
            lp = labels;
        } else {
            auto guess = std::filesystem::path(data).replace_extension(".labels");
            if (std::filesystem::exists(guess)) lp = guess;
        }
        return load_dataset(data, lp);
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    return out;
}

int run_enumerate(const DataArgs& d, bool count_only, const std::string& out_path) {
    const TransactionDB db = d.load();
    const auto t0 = std::chrono::steady_clock::now();
    if (count_only || out_path.empty()) {
        std::size_t n = 0;
        const EnumerationStats st = for_each_frequent(db, d.theta, nullptr, [&](const Itemset&, const Bitset&) {
            ++n;
            return true;
        });
        std::cout << n << "\n";
        std::cerr << db.name() << ": " << n << " frequent patterns at theta " << d.theta << ", " << st.nodes
                  << " nodes, " << std::fixed << std::setprecision(2) << seconds_since(t0) << " s\n";
        return 0;
    }
    std::ofstream out = open_out(out_path);
    std::size_t n = 0;
    for_each_frequent(db, d.theta, nullptr, [&](const Itemset& p, const Bitset& c) {
        for (Item i : p) out << i << ' ';
        out << '(' << c.count() << ")\n";
        ++n;
        return true;
    });
    std::cout << n << "\n";
    return 0;
}

struct SampleArgs {
    std::size_t n = 10;
    std::string mode = "exact";
    std::string strategy = "top1";
    double kappa = 0.9;
    double range_a = 0.5;
    std::string weights;
    std::string features = "ILFT";
    std::uint64_t seed = 1;
};

int run_sample(const DataArgs& d, const SampleArgs& a) {
    const TransactionDB db = d.load();
    SamplerConfig cfg;
    cfg.kappa = a.kappa;
    cfg.range_a = a.range_a;
    cfg.mode = parse_sampling_mode(a.mode);
    cfg.strategy = CellStrategy::parse(a.strategy);
    const LogisticModel model = a.weights.empty()
                                    ? LogisticModel(FeatureSchema(parse_feature_kind(a.features), db), a.range_a)
                                    : load_model(a.weights);
    if (model.schema() != FeatureSchema(model.schema().kind(), db)) {
        throw ConfigError("model was trained on a dataset of a different shape");
    }
    cfg.range_a = model.range_a();
    const PatternSampler sampler(db, d.theta, cfg);
    Rng rng(a.seed);
    const WeightFunction w = model.weight_function(db);
    for (const Pattern& p : sampler.sample_batch(w, a.n, rng)) {
        const Bitset c = cover(db, p.items);
        std::cout << p.items.to_string() << "\tsupport=" << p.support << "\tweight=" << std::setprecision(6)
                  << w(p.items, c) << "\n";
    }
    return 0;
}

struct ExperimentArgs {
    std::string phi = "freq";
    SessionParams params;
    std::string strategy = "top1";
    std::string features = "ILFT";
    std::string mode = "exact";
    std::size_t iters = 30;
    std::size_t seeds = 10;
    std::uint64_t base_seed = 1;
    unsigned threads = 1;
    std::string out;
    std::string sweep;
};

void print_summary(std::ostream& os, const std::string& label, const std::vector<RegretReport>& reports) {
    const RegretSummary s = summarize(reports);
    os << std::fixed << std::setprecision(2) << label << "  avg " << s.avg_mean << " +- " << s.avg_sd << "  max "
       << s.max_mean << " +- " << s.max_sd << "  H_J " << s.hj_mean << " +- " << s.hj_sd;
    if (s.failed > 0) os << "  (" << s.failed << " of " << s.runs << " runs failed)";
    os << "\n";
    for (const RegretReport& r : reports) {
        if (r.failed) os << "  seed " << r.seed << ": " << r.error << "\n";
    }
}

struct Context {
    TransactionDB db;
    std::shared_ptr<const PatternSpace> space;
    QualityMeasure phi;
    PercentileIndex index;

    Context(TransactionDB d, Support theta, MeasureKind kind)
        : db(std::move(d)), space(PatternSpace::build(db, theta)), phi(kind, db), index(db, *space, phi) {}

    EvaluationContext view() const { return {db, space, phi, index}; }
};

int run_experiment_cmd(const DataArgs& d, ExperimentArgs a) {
    const auto t0 = std::chrono::steady_clock::now();
    const Context ctx(d.load(), d.theta, parse_measure(a.phi));
    std::cerr << ctx.db.name() << ": " << ctx.space->size() << " frequent patterns (" << std::fixed
              << std::setprecision(2) << seconds_since(t0) << " s)\n";
    a.params.theta = d.theta;
    a.params.strategy = CellStrategy::parse(a.strategy);
    a.params.features = parse_feature_kind(a.features);
    a.params.mode = parse_sampling_mode(a.mode);
    a.params.validate();
    const std::vector<SessionParams> grid = a.sweep.empty() ? std::vector{a.params} : sweep_preset(a.sweep, a.params);
    ExperimentOptions opts{a.iters, a.seeds, a.base_seed, a.threads};

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!a.out.empty()) {
        file = open_out(a.out);
        out = &file;
    }
    write_csv_header(*out);
    for (const SessionParams& p : grid) {
        const auto reports = run_experiment(ctx.view(), p, opts);
        write_csv_rows(*out, reports);
        std::ostringstream label;
        label << "k=" << p.k << " l=" << p.l << " A=" << p.range_a << " " << p.strategy.to_string() << " "
              << to_string(p.features);
        print_summary(std::cerr, label.str(), reports);
    }
    return 0;
}

int run_ipm_cmd(const DataArgs& d, const std::string& phi, IpmParams ipm, std::size_t seeds, std::uint64_t base_seed,
                const std::string& out_path) {
    const Context ctx(d.load(), d.theta, parse_measure(phi));
    ExperimentOptions opts;
    opts.seeds = seeds;
    opts.base_seed = base_seed;
    const auto reports = run_ipm_experiment(ctx.view(), ipm, opts);
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!out_path.empty()) {
        file = open_out(out_path);
        out = &file;
    }
    write_csv_header(*out);
    write_csv_rows(*out, reports);
    print_summary(std::cerr, "ipm b=" + std::to_string(ipm.b), reports);
    return 0;
}

// Dense 0/1 matrix with one class column -> FIMI rows plus a label file.
int run_convert(const std::string& input, const std::string& prefix, bool label_first, int positive_class) {
    std::ifstream in(input);
    if (!in) throw ConfigError("cannot read " + input);
    std::ofstream dat = open_out(prefix + ".dat");
    std::ofstream lab = open_out(prefix + ".labels");
    std::string line;
    std::size_t rows = 0, width = 0, lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '@' || line[0] == '%' || line[0] == '#') continue;
        std::istringstream ss(line);
        std::vector<int> v;
        int x;
        while (ss >> x) v.push_back(x);
        if (v.size() < 2) continue;
        if (width == 0) width = v.size();
        if (v.size() != width) throw ParseError("row width changed", lineno);
        const int cls = label_first ? v.front() : v.back();
        const std::size_t begin = label_first ? 1 : 0, end = label_first ? v.size() : v.size() - 1;
        bool first = true;
        for (std::size_t j = begin; j < end; ++j) {
            if (v[j] != 0 && v[j] != 1) throw ParseError("feature values must be 0 or 1", lineno);
            if (v[j] == 1) {
                dat << (first ? "" : " ") << (j - begin + 1);
                first = false;
            }
        }
        dat << "\n";
        lab << (cls == positive_class ? 1 : 0) << "\n";
        ++rows;
    }
    if (rows == 0) throw ParseError("no data rows in " + input);
    std::cerr << "wrote " << rows << " transactions over " << (width - 1) << " items to " << prefix << ".dat\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interactive pattern sampling workbench"};
    app.require_subcommand(1);

    DataArgs enum_data;
    bool count_only = false;
    std::string enum_out;
    auto* enumerate = app.add_subcommand("enumerate", "count or list frequent itemsets");
    enum_data.add(enumerate);
    enumerate->add_flag("--count-only", count_only, "print only the count");
    enumerate->add_option("--out", enum_out, "write one pattern per line");

    DataArgs sample_data;
    SampleArgs sa;
    auto* sample = app.add_subcommand("sample", "draw patterns from a weighted model");
    sample_data.add(sample);
    sample->add_option("--n", sa.n, "number of patterns");
    sample->add_option("--mode", sa.mode, "exact|hashed");
    sample->add_option("--strategy", sa.strategy, "random|top1|top2|...");
    sample->add_option("--kappa", sa.kappa);
    sample->add_option("--range-a", sa.range_a);
    sample->add_option("--weights", sa.weights, "model JSON; zero weights when absent");
    sample->add_option("--features", sa.features, "I|ILF|ILFT, for zero weights");
    sample->add_option("--seed", sa.seed);

    DataArgs exp_data;
    ExperimentArgs ea;
    auto* experiment = app.add_subcommand("experiment", "emulated-user regret experiment, CSV output");
    exp_data.add(experiment);
    experiment->add_option("--phi", ea.phi, "freq|surp|chi2");
    experiment->add_option("--k", ea.params.k);
    experiment->add_option("--l", ea.params.l);
    experiment->add_option("--range-a", ea.params.range_a);
    experiment->add_option("--strategy", ea.strategy, "random|top1|top2|top3");
    experiment->add_option("--features", ea.features, "I|ILF|ILFT");
    experiment->add_option("--lambda", ea.params.lambda);
    experiment->add_option("--updates", ea.params.scd_updates, "SCD updates per iteration");
    experiment->add_option("--kappa", ea.params.kappa);
    experiment->add_option("--mode", ea.mode, "exact|hashed");
    experiment->add_option("--iters", ea.iters);
    experiment->add_option("--seeds", ea.seeds);
    experiment->add_option("--seed-base", ea.base_seed);
    experiment->add_option("--threads", ea.threads);
    experiment->add_option("--out", ea.out, "CSV path (stdout when absent)");
    experiment->add_option("--sweep", ea.sweep, "table2|table2-ofat");

    DataArgs ipm_data;
    std::string ipm_phi = "freq", ipm_out;
    IpmParams ipm;
    std::size_t ipm_seeds = 10;
    std::uint64_t ipm_seed_base = 1;
    auto* baseline = app.add_subcommand("baseline-ipm", "IPM multiplicative-weights baseline");
    ipm_data.add(baseline);
    baseline->add_option("--phi", ipm_phi, "freq|surp|chi2");
    baseline->add_option("--b", ipm.b);
    baseline->add_option("--rounds", ipm.rounds);
    baseline->add_option("--batch", ipm.batch);
    baseline->add_option("--seeds", ipm_seeds);
    baseline->add_option("--seed-base", ipm_seed_base);
    baseline->add_option("--out", ipm_out);

    std::string config, host = "0.0.0.0";
    int port = 8080;
    auto* serve = app.add_subcommand("serve", "run the HTTP session API");
    serve->add_option("--config", config, "server JSON config")->required()->check(CLI::ExistingFile);
    serve->add_option("--port", port);
    serve->add_option("--host", host);

    std::string conv_in, conv_prefix, conv_layout = "label-first";
    int positive = 1;
    auto* convert = app.add_subcommand("convert", "dense 0/1 matrix with a class column to .dat + .labels");
    convert->add_option("--input", conv_in)->required()->check(CLI::ExistingFile);
    convert->add_option("--out", conv_prefix, "output prefix")->required();
    convert->add_option("--layout", conv_layout, "label-first|label-last")
        ->check(CLI::IsMember({"label-first", "label-last"}));
    convert->add_option("--positive", positive, "class value mapped to +");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*enumerate) return run_enumerate(enum_data, count_only, enum_out);
        if (*sample) return run_sample(sample_data, sa);
        if (*experiment) return run_experiment_cmd(exp_data, ea);
        if (*baseline) return run_ipm_cmd(ipm_data, ipm_phi, ipm, ipm_seeds, ipm_seed_base, ipm_out);
        if (*serve) {
            SessionService service(ServerConfig::load(config));
            HttpServer server(service);
            std::cerr << "listening on " << host << ":" << port << "\n";
            return server.listen(host, port) ? 0 : 1;
        }
        if (*convert) return run_convert(conv_in, conv_prefix, conv_layout == "label-first", positive);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
