// sparselab: learned-sparse retrieval efficiency lab.
// Subcommands: index, search, train, sweep, fuse, eval, bench.

#include <cstdlib>
#include <filesystem>
#include <set>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sparselab/bench.hpp"
#include "sparselab/encoder.hpp"
#include "sparselab/evaluation.hpp"
#include "sparselab/fusion.hpp"
#include "sparselab/inverted_index.hpp"
#include "sparselab/retrieval.hpp"
#include "sparselab/sparse_vector.hpp"
#include "sparselab/training.hpp"

namespace {

using namespace sparselab;

// All file outputs are atomic: write a temp file next to the target, rename.
template <typename WriteFn>
void atomic_output(const std::string& path, WriteFn&& write) {
    std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    write(tmp.string());
    std::filesystem::rename(tmp, target);
}

void require_file(const std::string& path) {
    if (!std::filesystem::exists(path)) {
        throw std::runtime_error("input file not found: " + path);
    }
}

std::optional<std::uint64_t> env_seed() {
    const char* env = std::getenv("SPARSELAB_SEED");
    if (env == nullptr) return std::nullopt;
    return std::stoull(env);
}

// qid<TAB>text queries
std::vector<std::pair<std::string, std::string>> read_query_tsv(const std::string& path) {
    require_file(path);
    std::ifstream in(path);
    std::vector<std::pair<std::string, std::string>> queries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": missing tab separator");
        }
        queries.emplace_back(line.substr(0, tab), line.substr(tab + 1));
    }
    return queries;
}

// qid<TAB>space-separated integer token ids
std::vector<std::pair<std::string, std::vector<TermId>>> read_token_tsv(const std::string& path) {
    std::vector<std::pair<std::string, std::vector<TermId>>> out;
    for (auto& [qid, text] : read_query_tsv(path)) {
        std::istringstream ts(text);
        std::vector<TermId> tokens;
        std::uint64_t id;
        while (ts >> id) tokens.push_back(static_cast<TermId>(id));
        out.emplace_back(qid, std::move(tokens));
    }
    return out;
}

struct IndexArgs {
    std::string vectors, collection, out;
    std::uint32_t vocab_size = 0;
};

int run_index(const IndexArgs& args) {
    InvertedIndex index = [&]() {
        if (!args.vectors.empty()) {
            require_file(args.vectors);
            return InvertedIndex::build(read_vectors_jsonl(args.vectors, args.vocab_size));
        }
        require_file(args.collection);
        return InvertedIndex::build_from_tsv(args.collection);
    }();
    atomic_output(args.out, [&](const std::string& tmp) { index.save(tmp); });
    IndexStats stats = index.stats();
    std::cout << "indexed " << stats.doc_count << " docs, " << stats.term_count << " terms, "
              << stats.total_postings << " postings, mean nnz " << stats.mean_doc_nnz << '\n';
    return 0;
}

struct SearchArgs {
    std::string index, queries, queries_tsv, queries_tokens, checkpoint, out;
    std::string mode = "maxscore", tag = "sparselab", stopwords_file, encoder_side = "q";
    std::uint32_t k = 10;
    bool bm25 = false, splade_doc = false, stop = false;
    double k1 = 0.9, b = 0.4;
};

int run_search(const SearchArgs& args) {
    require_file(args.index);
    InvertedIndex index = InvertedIndex::load(args.index);
    StopWordList stopwords = args.stopwords_file.empty()
                                 ? StopWordList::lucene_english()
                                 : StopWordList::from_file(args.stopwords_file);
    const bool stopped = args.stop || !args.stopwords_file.empty();

    auto retrieve = [&](const SparseVector& vec, const std::string& qid) {
        return args.mode == "exhaustive" ? retrieve_exhaustive(index, vec, args.k, qid)
                                         : retrieve_maxscore(index, vec, args.k, qid);
    };

    std::vector<RunList> runs;
    if (args.bm25) {
        BM25Params params{args.k1, args.b};
        for (auto& [qid, text] : read_query_tsv(args.queries_tsv)) {
            std::vector<std::string> tokens = tokenize(text);
            if (stopped) tokens = remove_stop_words(tokens, stopwords);
            std::vector<TermId> terms;
            for (const auto& tok : tokens) {
                if (auto id = index.vocabulary().lookup(tok)) terms.push_back(*id);
            }
            runs.push_back(score_bm25(index, terms, params, args.k, qid));
        }
    } else if (args.splade_doc) {
        for (auto& [qid, text] : read_query_tsv(args.queries_tsv)) {
            SparseVector vec = splade_doc_query(tokenize(text), index.vocabulary(),
                                                index.vocab_size(), stopped, stopwords);
            runs.push_back(retrieve(vec, qid));
        }
    } else if (!args.checkpoint.empty()) {
        require_file(args.checkpoint);
        EncoderPair pair = load_checkpoint(args.checkpoint);
        const EncoderParams& params =
            args.encoder_side == "d" ? pair.doc_params() : pair.query_params();
        for (auto& [qid, tokens] : read_token_tsv(args.queries_tokens)) {
            if (tokens.empty()) {
                runs.push_back(RunList{qid, args.k, {}});
            } else {
                runs.push_back(retrieve(encode(params, tokens), qid));
            }
        }
    } else {
        require_file(args.queries);
        for (auto& [qid, vec] : read_vectors_jsonl(args.queries, index.vocab_size())) {
            runs.push_back(retrieve(vec, qid));
        }
    }
    atomic_output(args.out,
                  [&](const std::string& tmp) { write_run_file(runs, tmp, args.tag); });
    std::cout << "wrote " << runs.size() << " query runs to " << args.out << '\n';
    return 0;
}

struct TrainArgs {
    std::string config_file, preset, out, loss_csv;
    TrainConfig overrides;  // populated by CLI flags
    std::vector<std::pair<std::string, std::string>> raw_overrides;
};

TrainConfig resolve_train_config(const std::string& config_file, const std::string& preset,
                                 const std::vector<std::pair<std::string, std::string>>& raw) {
    TrainConfig config;
    if (!config_file.empty()) {
        require_file(config_file);
        config = TrainConfig::from_file(config_file);
    }
    if (!preset.empty()) config.apply_preset(preset);
    for (const auto& [key, value] : raw) config.apply_line(key, value);
    if (!config.seed) config.seed = env_seed();
    if (!config.seed) throw std::runtime_error("a seed is required (--seed or SPARSELAB_SEED)");
    return config;
}

int run_train(const TrainArgs& args) {
    TrainConfig config = resolve_train_config(args.config_file, args.preset, args.raw_overrides);
    SyntheticTask task = build_synthetic_task(*config.seed, config.vocab_size, config.num_docs,
                                              config.num_queries, config.num_heldout,
                                              config.candidates);
    TrainRun run = train_loop(config, task);
    atomic_output(args.out, [&](const std::string& tmp) {
        save_checkpoint(run.encoders, config.to_text(), tmp);
    });
    if (!args.loss_csv.empty()) {
        atomic_output(args.loss_csv,
                      [&](const std::string& tmp) { write_loss_csv(run.history, tmp); });
    }
    std::cout << "trained " << run.history.size() << " steps; final mean query nnz "
              << run.final_mean_q_nnz << ", mean doc nnz " << run.final_mean_d_nnz << '\n';
    return 0;
}

Qrels task_qrels(const SyntheticTask& task) {
    Qrels qrels;
    for (const QueryInstance& q : task.heldout_queries) {
        qrels.add(q.id, "d" + std::to_string(q.target_doc), 1);
    }
    return qrels;
}

// One trade-off measurement: index the encoded corpus, measure query latency
// (encode + retrieve) and MRR@10 on the held-out queries.
struct SweepRow {
    std::string config;
    double lambda_q, lambda_d, mean_q_nnz, latency_ms, mrr_at_10;
};

SweepRow measure_tradeoff(const std::string& name, const TrainConfig& config,
                          const SyntheticTask& task, const TrainRun& run) {
    std::vector<std::pair<std::string, SparseVector>> docs;
    docs.reserve(task.docs.size());
    for (std::size_t d = 0; d < task.docs.size(); ++d) {
        docs.emplace_back("d" + std::to_string(d), encode(run.encoders.doc, task.docs[d]));
    }
    InvertedIndex index = InvertedIndex::build(docs);

    std::vector<BenchQuery> queries;
    for (const QueryInstance& q : task.heldout_queries) {
        BenchQuery bq;
        bq.id = q.id;
        bq.tokens = q.tokens;
        if (config.splade_doc) {
            std::vector<SparseVector::Entry> entries;
            std::set<TermId> distinct(q.tokens.begin(), q.tokens.end());
            for (TermId t : distinct) entries.push_back({t, 1.0f});
            bq.precomputed = SparseVector::from_entries(config.vocab_size, std::move(entries));
        }
        queries.push_back(std::move(bq));
    }

    BenchOptions options;
    options.k = 10;
    options.warmup_passes = 2;
    options.measure_passes = 3;
    if (!config.splade_doc) options.encoder = &run.encoders.query_params();
    LatencyReport report = bench_latency(index, queries, options);
    EvalReport eval = evaluate_runs(bench_results(index, queries, options), task_qrels(task), 10);

    return SweepRow{name, config.lambda_q, config.lambda_d, run.final_mean_q_nnz,
                    report.mean_ms, eval.mean_mrr};
}

struct SweepArgs {
    std::string presets = "S,M,L";
    std::string config_file, out;
    std::vector<std::pair<std::string, std::string>> raw_overrides;
    std::string preset_unused;
};

int run_sweep(const SweepArgs& args) {
    std::vector<std::string> names;
    std::stringstream ps(args.presets);
    std::string name;
    while (std::getline(ps, name, ',')) {
        if (!name.empty()) names.push_back(name);
    }
    if (names.empty()) throw std::runtime_error("no presets given");

    std::vector<SweepRow> rows;
    for (const std::string& preset : names) {
        TrainConfig config = resolve_train_config(args.config_file, preset, args.raw_overrides);
        SyntheticTask task = build_synthetic_task(*config.seed, config.vocab_size,
                                                  config.num_docs, config.num_queries,
                                                  config.num_heldout, config.candidates);
        TrainRun run = train_loop(config, task);
        rows.push_back(measure_tradeoff(preset, config, task, run));
        std::cout << preset << ": nnz " << rows.back().mean_q_nnz << ", latency "
                  << rows.back().latency_ms << " ms, MRR@10 " << rows.back().mrr_at_10 << '\n';
    }
    atomic_output(args.out, [&](const std::string& tmp) {
        std::ofstream out(tmp);
        out << "config,lambda_q,lambda_d,mean_q_nnz,latency_ms,mrr_at_10\n";
        out.precision(9);
        for (const SweepRow& row : rows) {
            out << row.config << ',' << row.lambda_q << ',' << row.lambda_d << ','
                << row.mean_q_nnz << ',' << row.latency_ms << ',' << row.mrr_at_10 << '\n';
        }
    });
    return 0;
}

struct FuseArgs {
    std::string run_a, run_b, out, tag = "fused";
    FusionConfig config;
};

int run_fuse(const FuseArgs& args) {
    require_file(args.run_a);
    require_file(args.run_b);
    std::vector<RunList> fused =
        fuse_all(read_run_file(args.run_a), read_run_file(args.run_b), args.config);
    atomic_output(args.out,
                  [&](const std::string& tmp) { write_run_file(fused, tmp, args.tag); });
    std::cout << "fused " << fused.size() << " queries to " << args.out << '\n';
    return 0;
}

struct EvalArgs {
    std::string run, qrels, out;
    int k = 10;
    bool exp_gain = false;
};

int run_eval(const EvalArgs& args) {
    require_file(args.run);
    require_file(args.qrels);
    EvalReport report = evaluate_run_file(args.run, args.qrels, args.k, args.exp_gain);
    if (args.out.empty()) {
        if (report.defined) {
            std::cout << "MRR@" << args.k << " " << report.mean_mrr << "  nDCG@" << args.k << " "
                      << report.mean_ndcg << "  (" << report.rows.size() << " queries, "
                      << report.excluded << " excluded)\n";
        } else {
            std::cout << "MRR@" << args.k << " n/a  nDCG@" << args.k << " n/a  ("
                      << report.excluded << " excluded)\n";
        }
    } else {
        atomic_output(args.out, [&](const std::string& tmp) { write_eval_csv(report, tmp); });
    }
    return 0;
}

struct BenchArgs {
    std::string index, queries, queries_tokens, checkpoint, out;
    std::string mode = "maxscore", encoder_side = "q";
    std::uint32_t k = 10;
    int warmup = 10, reps = 3, workers = 1;
};

int run_bench(const BenchArgs& args) {
    require_file(args.index);
    InvertedIndex index = InvertedIndex::load(args.index);

    std::vector<BenchQuery> queries;
    EncoderPair pair;
    BenchOptions options;
    options.retriever = args.mode == "exhaustive" ? RetrieverChoice::Exhaustive
                                                  : RetrieverChoice::MaxScore;
    options.k = args.k;
    options.warmup_passes = args.warmup;
    options.measure_passes = args.reps;

    if (!args.checkpoint.empty()) {
        require_file(args.checkpoint);
        pair = load_checkpoint(args.checkpoint);
        options.encoder = args.encoder_side == "d" ? &pair.doc_params() : &pair.query_params();
        for (auto& [qid, tokens] : read_token_tsv(args.queries_tokens)) {
            queries.push_back(BenchQuery{qid, std::move(tokens), std::nullopt});
        }
    } else {
        require_file(args.queries);
        for (auto& [qid, vec] : read_vectors_jsonl(args.queries, index.vocab_size())) {
            queries.push_back(BenchQuery{qid, {}, vec});
        }
    }

    LatencyReport report = args.workers > 1 ? bench_qps(index, queries, options, args.workers)
                                            : bench_latency(index, queries, options);
    std::cout << "mean_ms,p50_ms,p99_ms,qps,workers\n" << summary_line(report) << '\n';
    if (!args.out.empty()) {
        atomic_output(args.out, [&](const std::string& tmp) { write_latency_csv(report, tmp); });
    }
    return 0;
}

// Shared train/sweep config override flags; collected as raw key=value pairs
// so that flags override config-file values.
void add_config_overrides(CLI::App* cmd,
                          std::vector<std::pair<std::string, std::string>>& raw) {
    auto add = [cmd, &raw](const std::string& flag, const std::string& key,
                           const std::string& desc) {
        cmd->add_option_function<std::string>(
            flag, [&raw, key](const std::string& v) { raw.emplace_back(key, v); }, desc);
    };
    add("--seed", "seed", "RNG seed (falls back to SPARSELAB_SEED)");
    add("--steps", "steps", "training steps (default 2000)");
    add("--lr", "learning_rate", "Adam learning rate (default 1e-2)");
    add("--lambda-q", "lambda_q", "query regularization weight");
    add("--lambda-d", "lambda_d", "document regularization weight");
    add("--q-reg", "q_reg", "query regularizer: flops|l1 (default l1)");
    add("--d-reg", "d_reg", "document regularizer: flops|l1 (default flops)");
    add("--batch-size", "batch_size", "queries per batch (default 4)");
    add("--scheduler-steps", "scheduler_steps", "lambda warmup steps (default 500)");
    add("--hidden-q", "hidden_q", "query encoder hidden size (default 4)");
    add("--hidden-d", "hidden_d", "document encoder hidden size (default 32)");
    add("--shared", "shared_encoders", "share query and document encoders (true|false)");
    add("--splade-doc", "splade_doc", "uniform tokenized queries, no query encoder (true|false)");
    add("--saturate", "saturate", "log-saturated activation (default true)");
    add("--vocab-size", "vocab_size", "toy vocabulary size (default 1024)");
    add("--num-docs", "num_docs", "synthetic corpus size (default 2000)");
    add("--num-queries", "num_queries", "synthetic train queries (default 200)");
    add("--num-heldout", "num_heldout", "synthetic held-out queries (default 100)");
    add("--candidates", "candidates", "candidates per training query (default 4)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparselab: learned-sparse retrieval efficiency lab"};
    app.require_subcommand(1);

    IndexArgs index_args;
    auto* index_cmd = app.add_subcommand("index", "build an inverted index");
    auto* vec_opt = index_cmd->add_option("--vectors", index_args.vectors,
                                          "JSONL sparse-vector collection");
    index_cmd->add_option("--collection", index_args.collection,
                          "TSV collection (docId<TAB>text), term-frequency index")
        ->excludes(vec_opt);
    index_cmd->add_option("--vocab-size", index_args.vocab_size,
                          "vocabulary size for --vectors (0 = infer)");
    index_cmd->add_option("--out", index_args.out, "output index file")->required();

    SearchArgs search_args;
    auto* search_cmd = app.add_subcommand("search", "top-k retrieval to a TREC run file");
    search_cmd->add_option("--index", search_args.index, "index file")->required();
    search_cmd->add_option("--queries", search_args.queries, "JSONL sparse-vector queries");
    search_cmd->add_option("--queries-tsv", search_args.queries_tsv,
                           "text queries (qid<TAB>text) for --bm25/--splade-doc");
    search_cmd->add_option("--queries-tokens", search_args.queries_tokens,
                           "token-id queries (qid<TAB>id id ...) for --checkpoint");
    search_cmd->add_option("--checkpoint", search_args.checkpoint,
                           "encode --queries-tokens with this encoder checkpoint");
    search_cmd->add_option("--encoder", search_args.encoder_side, "encoder side: q|d (default q)");
    search_cmd->add_option("--k", search_args.k, "hits per query (default 10)");
    search_cmd->add_option("--mode", search_args.mode, "exhaustive|maxscore (default maxscore)")
        ->check(CLI::IsMember({"exhaustive", "maxscore"}));
    search_cmd->add_flag("--bm25", search_args.bm25, "BM25 over a term-frequency index");
    search_cmd->add_option("--k1", search_args.k1, "BM25 k1 (default 0.9)");
    search_cmd->add_option("--b", search_args.b, "BM25 b (default 0.4)");
    search_cmd->add_flag("--splade-doc", search_args.splade_doc,
                         "uniform-weight tokenized queries");
    search_cmd->add_flag("--stop", search_args.stop, "remove stop words (built-in list)");
    search_cmd->add_option("--stopwords", search_args.stopwords_file,
                           "stop-word file (implies --stop)");
    search_cmd->add_option("--tag", search_args.tag, "run tag (default sparselab)");
    search_cmd->add_option("--out", search_args.out, "output TREC run file")->required();

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "train the toy encoder on a synthetic task");
    train_cmd->add_option("--config", train_args.config_file, "key=value config file");
    train_cmd->add_option("--preset", train_args.preset,
                          "S|M|L (L1 queries) or S-flops|M-flops|L-flops");
    train_cmd->add_option("--out", train_args.out, "output checkpoint file")->required();
    train_cmd->add_option("--loss-csv", train_args.loss_csv, "loss history CSV");
    add_config_overrides(train_cmd, train_args.raw_overrides);

    SweepArgs sweep_args;
    auto* sweep_cmd = app.add_subcommand("sweep", "train presets and measure the trade-off curve");
    sweep_cmd->add_option("--presets", sweep_args.presets, "comma-separated presets (default S,M,L)");
    sweep_cmd->add_option("--config", sweep_args.config_file, "key=value config file");
    sweep_cmd->add_option("--out", sweep_args.out, "output CSV")->required();
    add_config_overrides(sweep_cmd, sweep_args.raw_overrides);

    FuseArgs fuse_args;
    auto* fuse_cmd = app.add_subcommand("fuse", "min-max fuse two TREC run files");
    fuse_cmd->add_option("--run-a", fuse_args.run_a, "first run file")->required();
    fuse_cmd->add_option("--run-b", fuse_args.run_b, "second run file")->required();
    fuse_cmd->add_option("--depth", fuse_args.config.depth, "fusion depth (default 100)");
    fuse_cmd->add_option_function<double>(
        "--weight-a",
        [&fuse_args](double w) {
            fuse_args.config.weight_a = w;
            fuse_args.config.weight_b = 1.0 - w;
        },
        "weight of run A (default 0.5; run B gets 1-w)");
    fuse_cmd->add_option("--k", fuse_args.config.k, "output depth (default 100)");
    fuse_cmd->add_option("--tag", fuse_args.tag, "run tag (default fused)");
    fuse_cmd->add_option("--out", fuse_args.out, "output TREC run file")->required();

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "MRR@k and nDCG@k from a run and qrels");
    eval_cmd->add_option("--run", eval_args.run, "TREC run file")->required();
    eval_cmd->add_option("--qrels", eval_args.qrels, "TREC qrels file")->required();
    eval_cmd->add_option("--k", eval_args.k, "cutoff (default 10)");
    eval_cmd->add_flag("--exp-gain", eval_args.exp_gain, "exponential nDCG gain 2^g-1");
    eval_cmd->add_option("--out", eval_args.out, "CSV report (default: summary to stdout)");

    BenchArgs bench_args;
    auto* bench_cmd = app.add_subcommand("bench", "latency / QPS measurement");
    bench_cmd->add_option("--index", bench_args.index, "index file")->required();
    bench_cmd->add_option("--queries", bench_args.queries, "JSONL precomputed query vectors");
    bench_cmd->add_option("--queries-tokens", bench_args.queries_tokens,
                          "token-id queries for --checkpoint");
    bench_cmd->add_option("--checkpoint", bench_args.checkpoint, "encoder checkpoint");
    bench_cmd->add_option("--encoder", bench_args.encoder_side, "encoder side: q|d (default q)");
    bench_cmd->add_option("--k", bench_args.k, "hits per query (default 10)");
    bench_cmd->add_option("--mode", bench_args.mode, "exhaustive|maxscore (default maxscore)")
        ->check(CLI::IsMember({"exhaustive", "maxscore"}));
    bench_cmd->add_option("--warmup", bench_args.warmup, "warmup passes (default 10)");
    bench_cmd->add_option("--reps", bench_args.reps, "measurement passes (default 3)");
    bench_cmd->add_option("--workers", bench_args.workers, "worker threads (default 1)");
    bench_cmd->add_option("--out", bench_args.out, "sample CSV output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    auto usage_error = [](const std::string& msg) {
        std::cerr << "usage error: " << msg << '\n';
        return 1;
    };
    if (*index_cmd && index_args.vectors.empty() && index_args.collection.empty()) {
        return usage_error("index requires --vectors or --collection");
    }
    if (*search_cmd) {
        if ((search_args.bm25 || search_args.splade_doc) && search_args.queries_tsv.empty()) {
            return usage_error("--bm25/--splade-doc require --queries-tsv");
        }
        if (!search_args.checkpoint.empty() && search_args.queries_tokens.empty()) {
            return usage_error("--checkpoint requires --queries-tokens");
        }
        if (!search_args.bm25 && !search_args.splade_doc && search_args.checkpoint.empty() &&
            search_args.queries.empty()) {
            return usage_error("search requires --queries, --bm25, --splade-doc or --checkpoint");
        }
    }
    if (*bench_cmd && bench_args.checkpoint.empty() && bench_args.queries.empty()) {
        return usage_error("bench requires --queries or --checkpoint with --queries-tokens");
    }
    if (*bench_cmd && !bench_args.checkpoint.empty() && bench_args.queries_tokens.empty()) {
        return usage_error("--checkpoint requires --queries-tokens");
    }

    try {
        if (*index_cmd) return run_index(index_args);
        if (*search_cmd) return run_search(search_args);
        if (*train_cmd) return run_train(train_args);
        if (*sweep_cmd) return run_sweep(sweep_args);
        if (*fuse_cmd) return run_fuse(fuse_args);
        if (*eval_cmd) return run_eval(eval_args);
        if (*bench_cmd) return run_bench(bench_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
