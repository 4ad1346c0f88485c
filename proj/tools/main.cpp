// Command-line front end: generate / pretrain / distill / embed / eval /
// profile. Every training command takes one seed (flag, config file or
// LIGHTPATH_SEED) and is bit-reproducible from it.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "lightpath/cost_model.hpp"
#include "lightpath/distill.hpp"
#include "lightpath/downstream.hpp"
#include "lightpath/model_io.hpp"
#include "lightpath/ssl.hpp"
#include "lightpath/synthetic.hpp"

using namespace lightpath;

namespace {

// ---------------------------------------------------------------- config file

// Flat key=value file; keys are long option names without leading dashes.
// Values are injected before the user's flags, so explicit flags win.
std::vector<std::string> apply_config_file(const std::vector<std::string>& args) {
    std::vector<std::string> out;
    std::string config_path;
    std::size_t insert_at = 0;

    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw std::runtime_error("--config needs a file argument");
            config_path = args[i + 1];
            ++i;
            continue;
        }
        out.push_back(args[i]);
        if (out.size() == 2) insert_at = 2; // right after the subcommand
    }
    if (config_path.empty()) return out;
    if (insert_at == 0) {
        throw std::runtime_error("--config requires a subcommand");
    }

    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot open config file: " + config_path);
    std::vector<std::string> injected;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     " is not key=value: " + line);
        }
        injected.push_back("--" + line.substr(0, eq));
        injected.push_back(line.substr(eq + 1));
    }
    out.insert(out.begin() + static_cast<std::ptrdiff_t>(insert_at), injected.begin(),
               injected.end());
    return out;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag_seed) {
    if (flag_seed) return *flag_seed;
    if (const char* env = std::getenv("LIGHTPATH_SEED")) {
        return std::stoull(env);
    }
    throw std::runtime_error("a seed is required (--seed or LIGHTPATH_SEED)");
}

std::size_t max_path_length(const PathDataset& ds) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) n = std::max(n, ds.record(i).path.length());
    return n;
}

void assign_splits(PathDataset& ds, double test_frac, double val_frac, Rng& rng) {
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const double u = rng.uniform();
        ds.record(i).split = u < test_frac ? "test" : (u < test_frac + val_frac ? "val" : "train");
    }
}

// -------------------------------------------------------------------- generate

struct GenerateArgs {
    std::string grid;
    std::string network_in;
    std::string out_network = "network.txt";
    std::string out_dataset = "dataset.txt";
    std::size_t paths = 5000;
    std::size_t repeats = 10;
    std::size_t length = 100;
    std::string labels = "tt";
    std::size_t rank_k = 5;
    double tt_sigma = 0.2;
    double test_frac = 0.2;
    double val_frac = 0.0;
    std::optional<std::uint64_t> seed;
};

int cmd_generate(const GenerateArgs& a) {
    const std::uint64_t seed = resolve_seed(a.seed);
    Rng root(seed);

    RoadNetwork net;
    if (!a.grid.empty()) {
        std::size_t rows = 0, cols = 0;
        if (std::sscanf(a.grid.c_str(), "%zux%zu", &rows, &cols) != 2) {
            throw std::runtime_error("--grid expects ROWSxCOLS, e.g. 30x30");
        }
        net = generate_grid_network(rows, cols, root.fork("network").u64());
        net.save(a.out_network);
    } else if (!a.network_in.empty()) {
        net = RoadNetwork::load(a.network_in);
        net.save(a.out_network);
    } else {
        throw std::runtime_error("generate needs --grid or --network");
    }

    if (a.length < 2) throw std::runtime_error("--length must be >= 2 edges");
    if (a.repeats == 0 || a.paths % a.repeats != 0) {
        throw std::runtime_error("--paths must be divisible by --repeats");
    }
    const std::size_t n_seeds = a.paths / a.repeats;
    PathDataset walks =
        generate_synthetic_paths(net, n_seeds, a.length, a.repeats, root.fork("walks").u64());

    const bool want_tt = a.labels == "tt" || a.labels == "both";
    const bool want_rank = a.labels == "rank" || a.labels == "both";
    if (!want_tt && !want_rank && a.labels != "none") {
        throw std::runtime_error("--labels must be tt, rank, both or none");
    }

    PathDataset ds;
    Rng tt_rng = root.fork("travel-time");
    Rng rank_rng = root.fork("ranking");
    std::int64_t next_id = 0;
    for (std::size_t i = 0; i < walks.size(); ++i) {
        PathRecord rec;
        rec.id = next_id++;
        rec.path = walks.record(i).path;
        if (want_tt) {
            rec.travel_time = synth_travel_time(net, rec.path, tt_rng.u64(), a.tt_sigma);
        }
        if (want_rank) {
            rec.rank_score = 1.0; // the trajectory ranks highest
            auto cands = ranking_candidates(net, rec.path, a.rank_k, rank_rng.u64());
            ds.add(rec);
            for (std::size_t c = 1; c < cands.size(); ++c) {
                PathRecord alt;
                alt.id = next_id++;
                alt.path = cands[c].first;
                alt.rank_score = cands[c].second;
                if (want_tt) {
                    alt.travel_time = synth_travel_time(net, alt.path, tt_rng.u64(), a.tt_sigma);
                }
                ds.add(alt);
            }
            continue;
        }
        ds.add(rec);
    }

    Rng split_rng = root.fork("splits");
    assign_splits(ds, a.test_frac, a.val_frac, split_rng);
    ds.save(a.out_dataset);

    std::cout << "network: " << a.out_network << " (" << net.vertex_count() << " vertices, "
              << net.edge_count() << " edges)\n";
    std::cout << "dataset: " << a.out_dataset << " (" << ds.size() << " paths)\n";
    return 0;
}

// -------------------------------------------------------------------- pretrain

struct TrainCommon {
    std::string network;
    std::string dataset;
    std::string out;
    std::string log;
    std::size_t batch = 64;
    std::size_t epochs = 400;
    std::size_t warmup = 40;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.95;
    double weight_decay = 0.01;
    std::optional<std::uint64_t> seed;
};

struct PretrainArgs {
    TrainCommon common;
    double gamma1 = 0.4;
    double gamma2 = 0.8;
    double momentum = 0.99;
    std::size_t layers = 4;
    std::size_t heads = 8;
    std::size_t d_model = 128;
    std::size_t d_ff = 0; // 0: 2 * d_model
    std::size_t dec_layers = 1;
    std::size_t max_len = 0; // 0: longest dataset path
    bool unfrozen_targets = false;
    bool cn_cross_view = false;
};

EncoderConfig build_encoder_config(const RoadNetwork& net, const PathDataset& ds,
                                   std::size_t layers, std::size_t heads, std::size_t d_model,
                                   std::size_t d_ff, std::size_t dec_layers,
                                   std::size_t max_len) {
    EncoderConfig cfg;
    cfg.layers = layers;
    cfg.heads = heads;
    cfg.d_model = d_model;
    cfg.d_ff = d_ff == 0 ? 2 * d_model : d_ff;
    cfg.decoder_layers = dec_layers;
    cfg.vocab = net.edge_count();
    cfg.max_len = max_len == 0 ? max_path_length(ds) : max_len;
    cfg.validate();
    return cfg;
}

int cmd_pretrain(const PretrainArgs& a) {
    const std::uint64_t seed = resolve_seed(a.common.seed);
    RoadNetwork net = RoadNetwork::load(a.common.network);
    PathDataset ds = PathDataset::load(a.common.dataset);
    if (ds.empty()) throw std::runtime_error("dataset is empty");

    EncoderConfig cfg = build_encoder_config(net, ds, a.layers, a.heads, a.d_model, a.d_ff,
                                             a.dec_layers, a.max_len);

    Rng init_rng = Rng(seed).fork("init");
    DualEncoderState dual = DualEncoderState::init(cfg, a.momentum, init_rng);
    RelationHead head = RelationHead::init(cfg.d_model, init_rng);

    PretrainConfig pc;
    pc.views = {a.gamma1, a.gamma2};
    pc.batch_size = a.common.batch;
    pc.epochs = a.common.epochs;
    pc.warmup_epochs = a.common.warmup;
    pc.base_lr = a.common.lr;
    pc.momentum = a.momentum;
    pc.adamw.beta1 = a.common.beta1;
    pc.adamw.beta2 = a.common.beta2;
    pc.adamw.weight_decay = a.common.weight_decay;
    pc.frozen_recon_targets = !a.unfrozen_targets;
    pc.cross_network_cross_view = a.cn_cross_view;
    pc.seed = Rng(seed).fork("train").u64();

    PretrainResult result = pretrain(dual, head, net, ds, pc);

    nlohmann::json extra = {
        {"seed", seed},
        {"hyper",
         {{"gamma1", a.gamma1},
          {"gamma2", a.gamma2},
          {"batch", a.common.batch},
          {"epochs", a.common.epochs},
          {"warmup", a.common.warmup},
          {"lr", a.common.lr},
          {"beta1", a.common.beta1},
          {"beta2", a.common.beta2},
          {"weight_decay", a.common.weight_decay},
          {"frozen_targets", pc.frozen_recon_targets},
          {"cn_cross_view", pc.cross_network_cross_view}}}};
    if (!a.common.out.empty()) save_pretrain_checkpoint(a.common.out, dual, head, extra);
    if (!a.common.log.empty()) write_pretrain_log(a.common.log, result.history);

    if (!result.history.empty()) {
        std::printf("pretrain: %zu epochs, total loss %.6g -> %.6g\n", result.history.size(),
                    result.history.front().total, result.history.back().total);
    }
    return 0;
}

// --------------------------------------------------------------------- distill

struct DistillArgs {
    TrainCommon common;
    std::string teacher;
    std::size_t student_layers = 2;
    std::size_t student_heads = 1;
    double alpha = 0.6;
    double temperature = 9.0;
    double gamma = 0.5;
    bool softmax_variant = false;
};

int cmd_distill(const DistillArgs& a) {
    const std::uint64_t seed = resolve_seed(a.common.seed);
    RoadNetwork net = RoadNetwork::load(a.common.network);
    PathDataset ds = PathDataset::load(a.common.dataset);

    DistillPair pair;
    pair.teacher = load_encoder_checkpoint(a.teacher);

    EncoderConfig student_cfg = pair.teacher.cfg;
    student_cfg.layers = a.student_layers;
    student_cfg.heads = a.student_heads;
    student_cfg.decoder_layers = std::min(student_cfg.decoder_layers, a.student_layers - 1);
    student_cfg.validate();
    Rng init_rng = Rng(seed).fork("student-init");
    pair.student = EncoderModel::init(student_cfg, init_rng);

    DistillConfig cfg;
    cfg.alpha = a.alpha;
    cfg.temperature = a.temperature;
    cfg.gamma = a.gamma;
    cfg.softmax_variant = a.softmax_variant;

    DistillHyper hyper;
    hyper.batch_size = a.common.batch;
    hyper.epochs = a.common.epochs;
    hyper.warmup_epochs = a.common.warmup;
    hyper.base_lr = a.common.lr;
    hyper.adamw.beta1 = a.common.beta1;
    hyper.adamw.beta2 = a.common.beta2;
    hyper.adamw.weight_decay = a.common.weight_decay;
    hyper.seed = Rng(seed).fork("train").u64();

    DistillResult result = distill(pair, net, ds, cfg, hyper);

    nlohmann::json extra = {{"seed", seed},
                            {"distilled_from", a.teacher},
                            {"hyper",
                             {{"alpha", a.alpha},
                              {"temperature", a.temperature},
                              {"gamma", a.gamma},
                              {"batch", a.common.batch},
                              {"epochs", a.common.epochs},
                              {"warmup", a.common.warmup},
                              {"lr", a.common.lr}}}};
    if (!a.common.out.empty()) save_encoder_checkpoint(a.common.out, pair.student, extra);
    if (!a.common.log.empty()) write_distill_log(a.common.log, result.history);

    if (!result.history.empty()) {
        std::printf("distill: %zu epochs, glkd %.6g -> %.6g\n", result.history.size(),
                    result.history.front().glkd, result.history.back().glkd);
    }
    return 0;
}

// ----------------------------------------------------------------------- embed

struct EmbedArgs {
    std::string ckpt;
    std::string network;
    std::string dataset;
    std::string out = "embeddings.tsv";
    double gamma_eval = 0.0;
    std::optional<std::uint64_t> seed;
};

int cmd_embed(const EmbedArgs& a) {
    RoadNetwork net = RoadNetwork::load(a.network);
    PathDataset ds = PathDataset::load(a.dataset);
    EncoderModel model = load_encoder_checkpoint(a.ckpt);
    const std::uint64_t seed = a.gamma_eval > 0.0 ? resolve_seed(a.seed) : 0;

    auto rows = embed_dataset(model, net, ds, a.gamma_eval, seed);
    std::ofstream out(a.out);
    if (!out) throw std::runtime_error("cannot write " + a.out);
    char buf[32];
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out << ds.record(i).id;
        for (double v : rows[i]) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << '\t' << buf;
        }
        out << '\n';
    }
    std::cout << "embeddings: " << a.out << " (" << rows.size() << " x "
              << (rows.empty() ? 0 : rows[0].size()) << ")\n";
    return 0;
}

// ------------------------------------------------------------------------ eval

struct EvalArgs {
    std::string ckpt;
    std::string network;
    std::string dataset;
    std::string task = "tt";
    std::string report = "report.json";
    double gamma_eval = 0.0;
    std::size_t trees = 100;
    std::size_t depth = 3;
    double gbr_lr = 0.1;
    std::optional<std::uint64_t> seed;
};

int cmd_eval(const EvalArgs& a) {
    const std::uint64_t seed = resolve_seed(a.seed);
    RoadNetwork net = RoadNetwork::load(a.network);
    PathDataset ds = PathDataset::load(a.dataset);
    EncoderModel model = load_encoder_checkpoint(a.ckpt);

    Task task;
    if (a.task == "tt" || a.task == "travel_time") {
        task = Task::TravelTime;
    } else if (a.task == "rank" || a.task == "ranking") {
        task = Task::Ranking;
    } else {
        throw std::runtime_error("--task must be tt or rank");
    }

    GbrConfig gbr;
    gbr.n_trees = a.trees;
    gbr.max_depth = a.depth;
    gbr.learning_rate = a.gbr_lr;

    EvalResult result = eval_task(model, net, ds, task, gbr, seed, a.gamma_eval);

    nlohmann::json j;
    j["task"] = task_name(task);
    j["seed"] = seed;
    j["hyperparameters"] = {{"trees", a.trees},
                            {"depth", a.depth},
                            {"learning_rate", a.gbr_lr},
                            {"gamma_eval", a.gamma_eval}};
    j["train_count"] = result.train_count;
    j["test_count"] = result.test_count;
    j["metrics"] = {{"mae", result.report.mae},
                    {"mare", result.report.mare},
                    {"tau", result.report.tau},
                    {"rho", result.report.rho}};
    if (task == Task::TravelTime) j["metrics"]["mape"] = result.report.mape;

    std::ofstream out(a.report);
    if (!out) throw std::runtime_error("cannot write " + a.report);
    out << j.dump(2) << '\n';
    std::cout << "report: " << a.report << " (mae " << result.report.mae << ")\n";
    return 0;
}

// --------------------------------------------------------------------- profile

struct ProfileArgs {
    std::size_t layers = 12;
    std::size_t heads = 8;
    std::size_t d_model = 512;
    std::size_t d_ff = 1024;
    std::size_t dec_layers = 1;
    std::size_t vocab = 10000;
    std::size_t batch = 1;
    std::vector<std::size_t> n_list = {50, 100, 150, 200};
    std::vector<double> gamma_list = {0.0, 0.1, 0.3, 0.5, 0.7, 0.9};
    std::string out = "profile.csv";
    std::string json_out;
    bool table5 = false;
};

int cmd_profile(const ProfileArgs& a) {
    EncoderConfig cfg;
    cfg.layers = a.layers;
    cfg.heads = a.heads;
    cfg.d_model = a.d_model;
    cfg.d_ff = a.d_ff;
    cfg.decoder_layers = a.dec_layers;
    cfg.vocab = a.vocab;
    cfg.max_len = *std::max_element(a.n_list.begin(), a.n_list.end());
    cfg.validate();

    auto cells = scalability_report(cfg, a.n_list, a.gamma_list, a.batch);
    if (a.table5) {
        write_scalability_grid(a.out, cells);
    } else {
        write_scalability_csv(a.out, cells);
    }
    if (!a.json_out.empty()) {
        std::ofstream out(a.json_out);
        if (!out) throw std::runtime_error("cannot write " + a.json_out);
        out << scalability_breakdown_json(cfg, cells).dump(2) << '\n';
    }
    std::cout << "profile: " << a.out << " (" << cells.size() << " cells, "
              << count_params(cfg).params / 1e6 << "M params)\n";
    return 0;
}

// ----------------------------------------------------------------------- wiring

void add_common(CLI::App* cmd, TrainCommon& c, bool out_required) {
    cmd->add_option("--network", c.network, "network file")->required();
    cmd->add_option("--dataset", c.dataset, "dataset file")->required();
    auto* out = cmd->add_option("--out", c.out, "output checkpoint file");
    if (out_required) out->required();
    cmd->add_option("--log", c.log, "training log CSV");
    cmd->add_option("--batch", c.batch, "minibatch size");
    cmd->add_option("--epochs", c.epochs, "training epochs");
    cmd->add_option("--warmup", c.warmup, "warmup epochs");
    cmd->add_option("--lr", c.lr, "base learning rate");
    cmd->add_option("--beta1", c.beta1, "AdamW beta1");
    cmd->add_option("--beta2", c.beta2, "AdamW beta2");
    cmd->add_option("--weight-decay", c.weight_decay, "AdamW weight decay");
    cmd->add_option("--seed", c.seed, "run seed (or LIGHTPATH_SEED)");
}

int run(std::vector<std::string> args) {
    args = apply_config_file(args);

    CLI::App app{"sparse path representation learning pipeline"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.set_help_all_flag("--help-all", "print help for every command");

    GenerateArgs gen;
    auto* cgen = app.add_subcommand("generate", "synthesize a network and path dataset");
    cgen->add_option("--grid", gen.grid, "grid size ROWSxCOLS");
    cgen->add_option("--network", gen.network_in, "reuse an existing network file");
    cgen->add_option("--out-network", gen.out_network, "network output path");
    cgen->add_option("--out-dataset", gen.out_dataset, "dataset output path");
    cgen->add_option("--paths", gen.paths, "total number of walks");
    cgen->add_option("--repeats", gen.repeats, "walks per seed vertex");
    cgen->add_option("--length", gen.length, "edges per walk");
    cgen->add_option("--labels", gen.labels, "tt, rank, both or none");
    cgen->add_option("--rank-k", gen.rank_k, "alternative routes per trajectory");
    cgen->add_option("--tt-sigma", gen.tt_sigma, "lognormal congestion sigma");
    cgen->add_option("--test-frac", gen.test_frac, "test split fraction");
    cgen->add_option("--val-frac", gen.val_frac, "validation split fraction");
    cgen->add_option("--seed", gen.seed, "run seed (or LIGHTPATH_SEED)");

    PretrainArgs pre;
    auto* cpre = app.add_subcommand("pretrain", "dual-encoder relational-reasoning pretraining");
    add_common(cpre, pre.common, true);
    cpre->add_option("--gamma1", pre.gamma1, "view-1 reduction ratio");
    cpre->add_option("--gamma2", pre.gamma2, "view-2 reduction ratio");
    cpre->add_option("--momentum", pre.momentum, "auxiliary momentum m");
    cpre->add_option("--layers", pre.layers, "encoder layers");
    cpre->add_option("--heads", pre.heads, "attention heads");
    cpre->add_option("--d-model", pre.d_model, "model width");
    cpre->add_option("--d-ff", pre.d_ff, "FFN width (0: 2 x d-model)");
    cpre->add_option("--dec-layers", pre.dec_layers, "decoder layers");
    cpre->add_option("--max-len", pre.max_len, "position table size (0: longest path)");
    cpre->add_flag("--unfrozen-targets", pre.unfrozen_targets,
                   "let gradients flow through reconstruction targets");
    cpre->add_flag("--cn-cross-view", pre.cn_cross_view,
                   "cross-network positives pair opposite views");

    DistillArgs dis;
    auto* cdis = app.add_subcommand("distill", "global-local knowledge distillation");
    add_common(cdis, dis.common, true);
    cdis->add_option("--teacher", dis.teacher, "teacher checkpoint")->required();
    cdis->add_option("--student-layers", dis.student_layers, "student encoder layers");
    cdis->add_option("--student-heads", dis.student_heads, "student attention heads");
    cdis->add_option("--alpha", dis.alpha, "global/local balance");
    cdis->add_option("--temperature", dis.temperature, "distillation temperature");
    cdis->add_option("--gamma", dis.gamma, "shared sparse-view ratio");
    cdis->add_flag("--softmax-sp", dis.softmax_variant,
                   "normalize with softmax instead of raw exponential");

    EmbedArgs emb;
    auto* cemb = app.add_subcommand("embed", "write path representations for a dataset");
    cemb->add_option("--ckpt", emb.ckpt, "encoder or pretrain checkpoint")->required();
    cemb->add_option("--network", emb.network, "network file")->required();
    cemb->add_option("--dataset", emb.dataset, "dataset file")->required();
    cemb->add_option("--out", emb.out, "output TSV");
    cemb->add_option("--gamma-eval", emb.gamma_eval, "evaluation reduction ratio");
    cemb->add_option("--seed", emb.seed, "seed (needed when gamma-eval > 0)");

    EvalArgs eva;
    auto* ceva = app.add_subcommand("eval", "downstream regression evaluation");
    ceva->add_option("--ckpt", eva.ckpt, "encoder or pretrain checkpoint")->required();
    ceva->add_option("--network", eva.network, "network file")->required();
    ceva->add_option("--dataset", eva.dataset, "labeled dataset with split tags")->required();
    ceva->add_option("--task", eva.task, "tt or rank");
    ceva->add_option("--report", eva.report, "output JSON report");
    ceva->add_option("--gamma-eval", eva.gamma_eval, "evaluation reduction ratio");
    ceva->add_option("--trees", eva.trees, "boosting rounds");
    ceva->add_option("--depth", eva.depth, "tree depth");
    ceva->add_option("--gbr-lr", eva.gbr_lr, "boosting shrinkage");
    ceva->add_option("--seed", eva.seed, "run seed (or LIGHTPATH_SEED)");

    ProfileArgs pro;
    auto* cpro = app.add_subcommand("profile", "analytic parameter/FLOP/memory model");
    cpro->add_option("--layers", pro.layers, "encoder layers");
    cpro->add_option("--heads", pro.heads, "attention heads");
    cpro->add_option("--d-model", pro.d_model, "model width");
    cpro->add_option("--d-ff", pro.d_ff, "FFN width");
    cpro->add_option("--dec-layers", pro.dec_layers, "decoder layers");
    cpro->add_option("--vocab", pro.vocab, "edge vocabulary size");
    cpro->add_option("--batch", pro.batch, "batch size for memory figures");
    cpro->add_option("--N", pro.n_list, "path lengths")->delimiter(',');
    cpro->add_option("--gamma", pro.gamma_list, "reduction ratios")->delimiter(',');
    cpro->add_option("--out", pro.out, "output CSV");
    cpro->add_option("--json", pro.json_out, "breakdown JSON");
    cpro->add_flag("--table5", pro.table5, "emit the N x gamma grid layout");

    // --config is consumed before parsing; registered here for help output.
    std::string config_dummy;
    app.add_option("--config", config_dummy,
                   "flat key=value file applied before flags (per subcommand)");

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const std::string& s : args) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e); // --help
        }
        throw std::runtime_error(e.what());
    }

    if (cgen->parsed()) return cmd_generate(gen);
    if (cpre->parsed()) return cmd_pretrain(pre);
    if (cdis->parsed()) return cmd_distill(dis);
    if (cemb->parsed()) return cmd_embed(emb);
    if (ceva->parsed()) return cmd_eval(eva);
    if (cpro->parsed()) return cmd_profile(pro);
    throw std::runtime_error("no command given");
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    try {
        return run(std::move(args));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
}
