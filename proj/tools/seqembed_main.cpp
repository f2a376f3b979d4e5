// Command-line front end for the sequence embedding pipeline.
//
// Subcommands: gen-data, train, eval-class, embed, query, eval-recall,
// perturb, export. Every subcommand accepts --config FILE (flat key=value,
// unknown keys rejected, flags override) and echoes its resolved
// configuration as '# key=value' lines for reproducibility.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric/model error.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "seqembed/checkpoint.hpp"
#include "seqembed/datagen.hpp"
#include "seqembed/dataset.hpp"
#include "seqembed/embed_db.hpp"
#include "seqembed/error.hpp"
#include "seqembed/eval.hpp"
#include "seqembed/model.hpp"
#include "seqembed/noise.hpp"
#include "seqembed/train.hpp"

namespace {

using namespace seqembed;

void echo_config(const CLI::App* sub) {
  std::istringstream lines(sub->config_to_str(true, false));
  std::string line;
  std::cout << "# resolved config for '" << sub->get_name() << "'\n";
  while (std::getline(lines, line)) {
    if (!line.empty()) std::cout << "# " << line << '\n';
  }
}

void configure_common(CLI::App* sub) {
  // Consumed before parsing (see apply_config_file); declared so the flag is
  // documented and accepted.
  sub->add_option("--config", "Flat key=value config file; flags override");
}

std::string trim(const std::string& s) {
  const std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Expands `<sub> ... --config FILE ...` by appending one --key value pair per
/// config line. A key already given as a flag keeps the flag's value; unknown
/// keys surface as unknown options (usage error). Lines starting with '#' are
/// comments.
std::vector<std::string> apply_config_file(const std::vector<std::string>& args) {
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    }
  }
  if (config_path.empty()) return args;

  std::ifstream in(config_path);
  if (!in) throw DataError("cannot open config file '" + config_path + "'");

  std::vector<std::string> out = args;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw DataError(config_path + ":" + std::to_string(line_no) +
                      ": expected key=value");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    const std::string flag = "--" + key;
    bool overridden = false;
    for (const std::string& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) {
        overridden = true;
        break;
      }
    }
    if (overridden) continue;
    out.push_back(flag);
    out.push_back(value);
  }
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write output file '" + path + "'");
  return out;
}

// ---------------------------------------------------------------------------
// gen-data
// ---------------------------------------------------------------------------

struct GenDataArgs {
  GenSpec spec;
  std::string out_fasta = "families.fasta";
  std::string out_labels = "families.tsv";
  std::string manifest;
};

void add_gen_data(CLI::App& app, GenDataArgs& args, int& rc) {
  CLI::App* sub = app.add_subcommand("gen-data", "Generate synthetic gene families");
  configure_common(sub);
  sub->add_option("--families", args.spec.num_families, "Number of families")
      ->capture_default_str();
  sub->add_option("--per-family", args.spec.sequences_per_family,
                  "Sequences per family")
      ->capture_default_str();
  sub->add_option("--first-family-id", args.spec.first_family_id,
                  "First family id (held-out sets use a disjoint range)")
      ->capture_default_str();
  sub->add_option("--len-min", args.spec.len_min, "Minimum length (multiple of 3)")
      ->capture_default_str();
  sub->add_option("--len-max", args.spec.len_max, "Maximum length (multiple of 3)")
      ->capture_default_str();
  sub->add_option("--motif-count-min", args.spec.motif_count_min,
                  "Motifs per family, lower bound")
      ->capture_default_str();
  sub->add_option("--motif-count-max", args.spec.motif_count_max,
                  "Motifs per family, upper bound")
      ->capture_default_str();
  sub->add_option("--motif-len-min", args.spec.motif_len_min,
                  "Motif length, lower bound")
      ->capture_default_str();
  sub->add_option("--motif-len-max", args.spec.motif_len_max,
                  "Motif length, upper bound")
      ->capture_default_str();
  sub->add_option("--sub-rate", args.spec.substitution_rate,
                  "Within-family substitution rate")
      ->capture_default_str();
  sub->add_option("--seed", args.spec.seed, "Master seed")->capture_default_str();
  sub->add_option("--out-fasta", args.out_fasta, "Output FASTA path")
      ->capture_default_str();
  sub->add_option("--out-labels", args.out_labels, "Output label TSV path")
      ->capture_default_str();
  sub->add_option("--manifest", args.manifest, "Generation manifest path (key=value)");

  sub->callback([&args, sub, &rc]() {
    echo_config(sub);
    auto [ds, families] = generate_families(args.spec);
    write_dataset(ds, args.out_fasta, args.out_labels);
    if (!args.manifest.empty()) write_manifest(args.spec, args.manifest);
    std::cout << "wrote " << ds.size() << " sequences in " << ds.num_classes()
              << " families to " << args.out_fasta << '\n';
    rc = 0;
  });
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string fasta;
  std::string labels;
  std::string preset = "desk";
  TrainConfig cfg;
  double test_fraction = 0.2;
  std::string log_path;
};

void add_train(CLI::App& app, TrainArgs& args, int& rc) {
  CLI::App* sub = app.add_subcommand("train", "Train the classifier");
  configure_common(sub);
  sub->add_option("--fasta", args.fasta, "Training FASTA")->required();
  sub->add_option("--labels", args.labels, "Label TSV")->required();
  sub->add_option("--preset", args.preset, "Model preset: desk or full")
      ->check(CLI::IsMember({"desk", "full"}))
      ->capture_default_str();
  sub->add_option("--steps", args.cfg.steps, "Optimization steps")
      ->capture_default_str();
  sub->add_option("--batch", args.cfg.batch_size, "Batch size")->capture_default_str();
  sub->add_option("--lr", args.cfg.lr, "Adam learning rate")->capture_default_str();
  sub->add_option("--seed", args.cfg.seed, "Master seed")->capture_default_str();
  sub->add_option("--eval-every", args.cfg.eval_every,
                  "Evaluate and checkpoint every N steps (0 = end only)")
      ->capture_default_str();
  sub->add_option("--test-fraction", args.test_fraction, "Held-back test fraction")
      ->capture_default_str();
  sub->add_option("--checkpoint", args.cfg.checkpoint_path, "Checkpoint output path")
      ->required();
  sub->add_option("--log", args.log_path, "Training log TSV path");
  sub->add_option("--threads", args.cfg.threads, "Worker threads (0 = hardware)")
      ->capture_default_str();

  sub->callback([&args, sub, &rc]() {
    echo_config(sub);
    LabeledDataset ds = load_dataset(args.fasta, args.labels);
    split_dataset(ds, args.test_fraction,
                  RngStream::derive(args.cfg.seed, RngComponent::kSplit));

    ModelConfig mc = args.preset == "full"
                         ? ModelConfig::full_preset(ds.num_classes(), args.cfg.seed)
                         : ModelConfig::desk_preset(ds.num_classes(), args.cfg.seed);
    EmbedNet net = build(mc);
    TrainLog log = fit(net, ds, args.cfg);
    save_checkpoint(net, args.cfg.checkpoint_path);
    if (!args.log_path.empty()) log.write_tsv_file(args.log_path);

    if (!log.entries.empty()) {
      const TrainLogEntry& last = log.entries.back();
      std::cout << "final step " << last.step << " loss " << last.loss;
      if (last.test_accuracy) std::cout << " test_acc " << *last.test_accuracy;
      std::cout << '\n';
    }
    std::cout << "checkpoint written to " << args.cfg.checkpoint_path << '\n';
    rc = 0;
  });
}

// ---------------------------------------------------------------------------
// eval-class
// ---------------------------------------------------------------------------

struct EvalClassArgs {
  std::string checkpoint;
  std::string fasta;
  std::string labels;
  std::string out;
  std::size_t bins = 10;
  std::size_t threads = 0;
};

void add_eval_class(CLI::App& app, EvalClassArgs& args, int& rc) {
  CLI::App* sub = app.add_subcommand(
      "eval-class", "Classification report (accuracy, confusion, length bins)");
  configure_common(sub);
  sub->add_option("--checkpoint", args.checkpoint, "Model checkpoint")->required();
  sub->add_option("--fasta", args.fasta, "Evaluation FASTA")->required();
  sub->add_option("--labels", args.labels, "Label TSV")->required();
  sub->add_option("--out", args.out, "Report TSV path")->required();
  sub->add_option("--bins", args.bins, "Length histogram bins")->capture_default_str();
  sub->add_option("--threads", args.threads, "Worker threads")->capture_default_str();

  sub->callback([&args, sub, &rc]() {
    echo_config(sub);
    EmbedNet net = load_checkpoint(args.checkpoint);
    LabeledDataset ds = load_dataset(args.fasta, args.labels);
    for (LabeledRecord& r : ds.records) r.split = Split::kTest;
    ClassReport report = classification_report(net, ds, args.bins, args.threads);
    std::ofstream out = open_out(args.out);
    report.write_tsv(out, ds.class_names);
    std::cout << "accuracy " << report.accuracy << " over " << report.total
              << " records\n";
    rc = 0;
  });
}

// ---------------------------------------------------------------------------
// embed
// ---------------------------------------------------------------------------

struct EmbedArgs {
  std::string checkpoint;
  std::string fasta;
  std::string labels;
  std::string out;
  std::size_t threads = 0;
};

void add_embed(CLI::App& app, EmbedArgs& args, int& rc) {
  CLI::App* sub =
      app.add_subcommand("embed", "Embed sequences and export an embedding TSV");
  configure_common(sub);
  sub->add_option("--checkpoint", args.checkpoint, "Model checkpoint")->required();
  sub->add_option("--fasta", args.fasta, "Input FASTA")->required();
  sub->add_option("--labels", args.labels,
                  "Label TSV (optional; unlabeled sequences get '-')");
  sub->add_option("--out", args.out, "Embedding TSV path")->required();
  sub->add_option("--threads", args.threads, "Worker threads")->capture_default_str();

  sub->callback([&args, sub, &rc]() {
    echo_config(sub);
    EmbedNet net = load_checkpoint(args.checkpoint);
    LabeledDataset ds;
    if (!args.labels.empty()) {
      ds = load_dataset(args.fasta, args.labels);
    } else {
      for (DnaSequence& s : read_fasta(args.fasta)) {
        LabeledRecord r;
        r.sequence = std::move(s);
        r.label = "-";
        ds.records.push_back(std::move(r));
      }
      ds.reindex();
    }
    BuildReport report;
    EmbeddingDatabase db = build_db(net, ds, std::nullopt, args.threads, &report);
    export_embeddings(db, args.out);
    std::cout << "embedded " << db.size() << " sequences (" << report.skipped
              << " skipped) to " << args.out << '\n';
    for (const BatchItemError& e : report.errors) {
      std::cerr << "skipped record " << e.index << ": " << e.message << '\n';
    }
    rc = 0;
  });
}

// ---------------------------------------------------------------------------
// query
// ---------------------------------------------------------------------------

struct QueryArgs {
  std::string db_path;
  std::string checkpoint;
  std::string queries;
  std::string out;
  std::size_t k = 10;
};

void add_query(CLI::App& app, QueryArgs& args, int& rc) {
  CLI::App* sub =
      app.add_subcommand("query", "Rank database embeddings against query sequences");
  configure_common(sub);
  sub->add_option("--db", args.db_path, "Embedding TSV database")->required();
  sub->add_option("--checkpoint", args.checkpoint, "Model checkpoint")->required();
  sub->add_option("--queries", args.queries, "Query FASTA")->required();
  sub->add_option("--k", args.k, "Neighbors per query")->capture_default_str();
  sub->add_option("--out", args.out, "Result TSV path")->required();

  sub->callback([&args, sub, &rc]() {
    echo_config(sub);
    EmbeddingDatabase db = import_embeddings(args.db_path);
    EmbedNet net = load_checkpoint(args.checkpoint);
    if (db.dim() != net.config.embedding_dim) {
      throw DataError("database dimension " + std::to_string(db.dim()) +
                      " does not match the checkpoint's embedding dimension " +
                      std::to_string(net.config.embedding_dim));
    }
    std::vector<DnaSequence> queries = read_fasta(args.queries);

    std::ofstream out = open_out(args.out);
    out << "query\trank\tid\tlabel\tdistance\n";
    char buf[40];
    for (const DnaSequence& q : queries) {
      Tensor vec = forward_embedding(net, encode_for_net(net.config, q));
      const auto hits = resolve_hits(
          db,
          knn_query(db, std::span<const double>(vec.data.data(), vec.size()), args.k));
      for (std::size_t rank = 0; rank < hits.size(); ++rank) {
        std::snprintf(buf, sizeof(buf), "%.9g", hits[rank].distance);
        out << q.id << '\t' << (rank + 1) << '\t' << hits[rank].id << '\t'
            << hits[rank].label << '\t' << buf << '\n';
      }
    }
    std::cout << "wrote top-" << args.k << " neighbors for " << queries.size()
              << " queries to " << args.out << '\n';
    rc = 0;
  });
}

// ---------------------------------------------------------------------------
// eval-recall
// ---------------------------------------------------------------------------

struct EvalRecallArgs {
  std::string checkpoint;
  std::string fasta;
  std::string labels;
  std::string out;
  std::vector<std::size_t> ns{1, 10, 20, 50};
  std::size_t repetitions = 1;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
};

void add_eval_recall(CLI::App& app, EvalRecallArgs& args, int& rc) {
  CLI::App* sub = app.add_subcommand(
      "eval-recall", "Recall-at-N over held-out-class query/database pairs");
  configure_common(sub);
  sub->add_option("--checkpoint", args.checkpoint, "Model checkpoint")->required();
  sub->add_option("--fasta", args.fasta, "Held-out-class FASTA")->required();
  sub->add_option("--labels", args.labels, "Label TSV")->required();
  sub->add_option("--out", args.out, "Recall report TSV path")->required();
  sub->add_option("--ns", args.ns, "Recall cutoffs")
      ->delimiter(',')
      ->capture_default_str();
  sub->add_option("--repetitions", args.repetitions, "Pair redraws to average over")
      ->capture_default_str();
  sub->add_option("--seed", args.seed, "Pair-draw seed")->capture_default_str();
  sub->add_option("--threads", args.threads, "Worker threads")->capture_default_str();

  sub->callback([&args, sub, &rc]() {
    echo_config(sub);
    EmbedNet net = load_checkpoint(args.checkpoint);
    LabeledDataset ds = load_dataset(args.fasta, args.labels);

    std::vector<std::size_t> ns = args.ns;
    std::sort(ns.begin(), ns.end());
    // Cutoffs beyond the pair count are meaningless for this database.
    while (!ns.empty() && ns.back() > ds.num_classes()) ns.pop_back();
    if (ns.empty()) throw DataError("no recall cutoff is <= the number of classes");

    std::vector<double> sums(ns.size(), 0.0);
    std::ofstream out = open_out(args.out);
    out << "# pairs=" << ds.num_classes() << " repetitions=" << args.repetitions
        << '\n';
    out << "rep";
    for (std::size_t n : ns) out << "\trecall@" << n;
    out << '\n';
    for (std::size_t rep = 0; rep < args.repetitions; ++rep) {
      const auto pairs = draw_class_pairs(ds, args.seed + rep);
      RecallReport report = recall_at_n(net, pairs, ns, args.threads);
      out << rep;
      for (std::size_t i = 0; i < ns.size(); ++i) {
        out << '\t' << report.recall[i];
        sums[i] += report.recall[i];
      }
      out << '\n';
    }
    out << "mean";
    std::cout << "mean";
    for (std::size_t i = 0; i < ns.size(); ++i) {
      const double mean = sums[i] / static_cast<double>(args.repetitions);
      out << '\t' << mean;
      std::cout << " recall@" << ns[i] << "=" << mean;
    }
    out << '\n';
    std::cout << '\n';
    rc = 0;
  });
}

// ---------------------------------------------------------------------------
// perturb
// ---------------------------------------------------------------------------

struct PerturbArgs {
  std::string fasta;
  std::string out;
  std::string kind = "substitution";
  double p = 0.0;
  bool unaligned = false;
  std::uint64_t seed = 0;
  std::string manifest;
};

void add_perturb(CLI::App& app, PerturbArgs& args, int& rc) {
  CLI::App* sub = app.add_subcommand("perturb", "Apply noise to a FASTA file");
  configure_common(sub);
  sub->add_option("--fasta", args.fasta, "Input FASTA")->required();
  sub->add_option("--out", args.out, "Perturbed FASTA path")->required();
  sub->add_option("--kind", args.kind, "substitution or deletion")
      ->check(CLI::IsMember({"substitution", "deletion"}))
      ->capture_default_str();
  sub->add_option("--p", args.p, "Noise level in [0,1]")->capture_default_str();
  sub->add_flag("--unaligned", args.unaligned,
                "Deletion: do not align the removed segment to codons");
  sub->add_option("--seed", args.seed, "Master seed")->capture_default_str();
  sub->add_option("--manifest", args.manifest, "Manifest path (key=value)");

  sub->callback([&args, sub, &rc]() {
    echo_config(sub);
    std::vector<DnaSequence> seqs = read_fasta(args.fasta);
    NoiseSpec spec;
    spec.kind =
        args.kind == "substitution" ? NoiseKind::kSubstitution : NoiseKind::kDeletion;
    spec.p = args.p;
    spec.codon_aligned = !args.unaligned;
    spec.seed = args.seed;
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      RngStream rng = RngStream::derive(args.seed, RngComponent::kNoise, i);
      seqs[i] = apply_noise(seqs[i], spec, rng);
    }
    write_fasta(seqs, args.out);
    if (!args.manifest.empty()) {
      std::ofstream m = open_out(args.manifest);
      m << "kind=" << args.kind << '\n'
        << "p=" << args.p << '\n'
        << "codon_aligned=" << (spec.codon_aligned ? 1 : 0) << '\n'
        << "seed=" << args.seed << '\n'
        << "input=" << args.fasta << '\n';
    }
    std::cout << "perturbed " << seqs.size() << " sequences to " << args.out << '\n';
    rc = 0;
  });
}

// ---------------------------------------------------------------------------
// export
// ---------------------------------------------------------------------------

struct ExportArgs {
  std::string db_path;
  std::string out;
};

void add_export(CLI::App& app, ExportArgs& args, int& rc) {
  CLI::App* sub = app.add_subcommand(
      "export", "Validate an embedding TSV and rewrite it in canonical form");
  configure_common(sub);
  sub->add_option("--db", args.db_path, "Embedding TSV to read")->required();
  sub->add_option("--out", args.out, "Rewritten TSV path")->required();

  sub->callback([&args, sub, &rc]() {
    echo_config(sub);
    EmbeddingDatabase db = import_embeddings(args.db_path);
    export_embeddings(db, args.out);
    std::cout << "rewrote " << db.size() << " embeddings (dim " << db.dim() << ") to "
              << args.out << '\n';
    rc = 0;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DNA sequence embedding and similarity search pipeline"};
  app.require_subcommand(1);

  int rc = 3;
  GenDataArgs gen_args;
  TrainArgs train_args;
  EvalClassArgs eval_class_args;
  EmbedArgs embed_args;
  QueryArgs query_args;
  EvalRecallArgs eval_recall_args;
  PerturbArgs perturb_args;
  ExportArgs export_args;

  add_gen_data(app, gen_args, rc);
  add_train(app, train_args, rc);
  add_eval_class(app, eval_class_args, rc);
  add_embed(app, embed_args, rc);
  add_query(app, query_args, rc);
  add_eval_recall(app, eval_recall_args, rc);
  add_perturb(app, perturb_args, rc);
  add_export(app, export_args, rc);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = apply_config_file(args);
    // CLI11 consumes reversed argument vectors.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    // --help lands here with Success; anything else is a usage error.
    const int cli_rc = app.exit(e);
    return cli_rc == 0 ? 0 : 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return rc;
}
