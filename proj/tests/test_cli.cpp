// End-to-end tests of the command-line interface: each case spawns the real
// binary and inspects exit codes and output files.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("seqembed_cli_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run_cli(const std::string& args, const std::string& log_path) {
  const std::string cmd =
      std::string(SEQEMBED_CLI_PATH) + " " + args + " > " + log_path + " 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("gen-data is byte-identical under a fixed seed") {
  TempDir dir;
  const std::string common =
      "gen-data --families 10 --per-family 100 --seed 7 --len-min 150 --len-max 201";
  CHECK(run_cli(common + " --out-fasta " + dir.file("a.fasta") + " --out-labels " +
                    dir.file("a.tsv") + " --manifest " + dir.file("a.manifest"),
                dir.file("log1")) == 0);
  CHECK(run_cli(common + " --out-fasta " + dir.file("b.fasta") + " --out-labels " +
                    dir.file("b.tsv"),
                dir.file("log2")) == 0);
  const std::string a = slurp(dir.file("a.fasta"));
  CHECK_FALSE(a.empty());
  CHECK(a == slurp(dir.file("b.fasta")));
  CHECK(slurp(dir.file("a.tsv")) == slurp(dir.file("b.tsv")));
  CHECK(slurp(dir.file("a.manifest")).find("seed=7") != std::string::npos);

  // The resolved config is echoed for reproducibility.
  CHECK(slurp(dir.file("log1")).find("# resolved config") != std::string::npos);
}

TEST_CASE("full pipeline: gen-data, train, embed, query, eval-recall, eval-class") {
  TempDir dir;

  // Small but real: 4 families, short sequences, a few training steps.
  CHECK(run_cli("gen-data --families 4 --per-family 12 --seed 3 --len-min 90 "
                "--len-max 120 --sub-rate 0.2 --motif-count-min 2 --motif-count-max 3 "
                "--motif-len-max 15 --out-fasta " +
                    dir.file("train.fasta") + " --out-labels " + dir.file("train.tsv"),
                dir.file("gen.log")) == 0);

  CHECK(run_cli("train --fasta " + dir.file("train.fasta") + " --labels " +
                    dir.file("train.tsv") +
                    " --steps 25 --batch 8 --seed 5 --test-fraction 0.25 "
                    "--checkpoint " +
                    dir.file("model.ckpt") + " --log " + dir.file("train_log.tsv"),
                dir.file("train.log")) == 0);
  CHECK(fs::exists(dir.file("model.ckpt")));

  // Training log is TSV with a header and one row per step.
  {
    std::ifstream log(dir.file("train_log.tsv"));
    std::string header;
    REQUIRE(std::getline(log, header));
    CHECK(header == "step\tloss\ttest_acc");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(log, line)) ++rows;
    CHECK(rows == 25);
  }

  CHECK(run_cli("embed --checkpoint " + dir.file("model.ckpt") + " --fasta " +
                    dir.file("train.fasta") + " --labels " + dir.file("train.tsv") +
                    " --out " + dir.file("emb.tsv"),
                dir.file("embed.log")) == 0);

  // Embedding TSV: header + one row per sequence, 2 + dim columns.
  {
    std::ifstream emb(dir.file("emb.tsv"));
    std::string header;
    REQUIRE(std::getline(emb, header));
    CHECK(header.rfind("id\tlabel\tv1\t", 0) == 0);
    std::size_t rows = 0;
    std::string line;
    while (std::getline(emb, line)) ++rows;
    CHECK(rows == 48);
  }

  CHECK(run_cli("query --db " + dir.file("emb.tsv") + " --checkpoint " +
                    dir.file("model.ckpt") + " --queries " + dir.file("train.fasta") +
                    " --k 3 --out " + dir.file("hits.tsv"),
                dir.file("query.log")) == 0);
  {
    std::ifstream hits(dir.file("hits.tsv"));
    std::string header;
    REQUIRE(std::getline(hits, header));
    CHECK(header == "query\trank\tid\tlabel\tdistance");
    // A database sequence queried against itself ranks first at distance 0.
    std::string first;
    REQUIRE(std::getline(hits, first));
    std::istringstream ss(first);
    std::string q, rank, id, label, dist;
    std::getline(ss, q, '\t');
    std::getline(ss, rank, '\t');
    std::getline(ss, id, '\t');
    std::getline(ss, label, '\t');
    std::getline(ss, dist, '\t');
    CHECK(q == id);
    CHECK(rank == "1");
    // The database passed through 9-significant-digit TSV storage.
    CHECK(std::stod(dist) < 1e-6);
  }

  // Held-out families for the recall protocol.
  CHECK(run_cli("gen-data --families 5 --per-family 6 --first-family-id 100 --seed 11 "
                "--len-min 90 --len-max 120 --sub-rate 0.2 --motif-count-min 2 "
                "--motif-count-max 3 --motif-len-max 15 --out-fasta " +
                    dir.file("held.fasta") + " --out-labels " + dir.file("held.tsv"),
                dir.file("gen2.log")) == 0);
  CHECK(run_cli("eval-recall --checkpoint " + dir.file("model.ckpt") + " --fasta " +
                    dir.file("held.fasta") + " --labels " + dir.file("held.tsv") +
                    " --ns 1,3,5 --repetitions 4 --seed 2 --out " +
                    dir.file("recall.tsv"),
                dir.file("recall.log")) == 0);
  {
    const std::string recall = slurp(dir.file("recall.tsv"));
    CHECK(recall.find("# pairs=5 repetitions=4") != std::string::npos);
    CHECK(recall.find("rep\trecall@1\trecall@3\trecall@5") != std::string::npos);
    CHECK(recall.find("mean\t") != std::string::npos);
  }

  CHECK(run_cli("eval-class --checkpoint " + dir.file("model.ckpt") + " --fasta " +
                    dir.file("train.fasta") + " --labels " + dir.file("train.tsv") +
                    " --out " + dir.file("report.tsv"),
                dir.file("class.log")) == 0);
  {
    const std::string report = slurp(dir.file("report.tsv"));
    CHECK(report.find("# accuracy") != std::string::npos);
    CHECK(report.find("# confusion") != std::string::npos);
    CHECK(report.find("accuracy by sequence length") != std::string::npos);
  }
}

TEST_CASE("query with k larger than the database exits 2") {
  TempDir dir;
  CHECK(run_cli("gen-data --families 2 --per-family 3 --seed 1 --len-min 90 "
                "--len-max 90 --motif-count-max 4 --motif-len-max 21 --out-fasta " +
                    dir.file("d.fasta") + " --out-labels " + dir.file("d.tsv"),
                dir.file("g.log")) == 0);
  CHECK(run_cli("train --fasta " + dir.file("d.fasta") + " --labels " +
                    dir.file("d.tsv") +
                    " --steps 2 --batch 4 --test-fraction 0.34 --checkpoint " +
                    dir.file("m.ckpt"),
                dir.file("t.log")) == 0);
  CHECK(run_cli("embed --checkpoint " + dir.file("m.ckpt") + " --fasta " +
                    dir.file("d.fasta") + " --labels " + dir.file("d.tsv") + " --out " +
                    dir.file("e.tsv"),
                dir.file("e.log")) == 0);

  const int rc = run_cli("query --db " + dir.file("e.tsv") + " --checkpoint " +
                             dir.file("m.ckpt") + " --queries " + dir.file("d.fasta") +
                             " --k 100 --out " + dir.file("h.tsv"),
                         dir.file("q.log"));
  CHECK(rc == 2);
  CHECK(slurp(dir.file("q.log")).find("out of range") != std::string::npos);
}

TEST_CASE("perturb writes a manifest and export round-trips") {
  TempDir dir;
  CHECK(run_cli("gen-data --families 2 --per-family 4 --seed 9 --len-min 120 "
                "--len-max 150 --motif-count-max 5 --out-fasta " +
                    dir.file("p.fasta") + " --out-labels " + dir.file("p.tsv"),
                dir.file("g.log")) == 0);

  CHECK(run_cli("perturb --fasta " + dir.file("p.fasta") + " --out " +
                    dir.file("noisy.fasta") +
                    " --kind deletion --p 0.1 --seed 4 --manifest " +
                    dir.file("noise.manifest"),
                dir.file("p.log")) == 0);
  const std::string manifest = slurp(dir.file("noise.manifest"));
  CHECK(manifest.find("kind=deletion") != std::string::npos);
  CHECK(manifest.find("p=0.1") != std::string::npos);
  CHECK(manifest.find("codon_aligned=1") != std::string::npos);

  // Same seed, same output.
  CHECK(run_cli("perturb --fasta " + dir.file("p.fasta") + " --out " +
                    dir.file("noisy2.fasta") + " --kind deletion --p 0.1 --seed 4",
                dir.file("p2.log")) == 0);
  CHECK(slurp(dir.file("noisy.fasta")) == slurp(dir.file("noisy2.fasta")));

  // export validates and rewrites an embedding TSV byte-identically.
  CHECK(run_cli("train --fasta " + dir.file("p.fasta") + " --labels " +
                    dir.file("p.tsv") +
                    " --steps 2 --batch 4 --test-fraction 0.25 --checkpoint " +
                    dir.file("m.ckpt"),
                dir.file("t.log")) == 0);
  CHECK(run_cli("embed --checkpoint " + dir.file("m.ckpt") + " --fasta " +
                    dir.file("p.fasta") + " --labels " + dir.file("p.tsv") + " --out " +
                    dir.file("e.tsv"),
                dir.file("e.log")) == 0);
  CHECK(run_cli("export --db " + dir.file("e.tsv") + " --out " + dir.file("e2.tsv"),
                dir.file("x.log")) == 0);
  CHECK(slurp(dir.file("e.tsv")) == slurp(dir.file("e2.tsv")));
}

TEST_CASE("usage errors exit 1") {
  TempDir dir;
  CHECK(run_cli("no-such-subcommand", dir.file("u1.log")) == 1);
  CHECK(run_cli("gen-data --no-such-flag 3", dir.file("u2.log")) == 1);

  // Unknown keys in a config file are rejected.
  {
    std::ofstream cfg(dir.file("bad.cfg"));
    cfg << "families=3\nnot_a_real_key=7\n";
  }
  CHECK(run_cli("gen-data --config " + dir.file("bad.cfg") + " --out-fasta " +
                    dir.file("c.fasta") + " --out-labels " + dir.file("c.tsv"),
                dir.file("u3.log")) == 1);
}

TEST_CASE("config file values are applied and flags override them") {
  TempDir dir;
  {
    std::ofstream cfg(dir.file("gen.cfg"));
    cfg << "families=3\nper-family=5\nseed=21\nlen-min=90\nlen-max=120\n"
           "motif-count-min=2\nmotif-count-max=3\nmotif-len-max=15\n";
  }
  CHECK(run_cli("gen-data --config " + dir.file("gen.cfg") + " --per-family 4 "
                "--out-fasta " +
                    dir.file("c.fasta") + " --out-labels " + dir.file("c.tsv"),
                dir.file("c.log")) == 0);
  // 3 families x 4 per family (flag wins over the config's 5).
  std::ifstream tsv(dir.file("c.tsv"));
  std::size_t rows = 0;
  std::string line;
  while (std::getline(tsv, line)) ++rows;
  CHECK(rows == 12);
  const std::string log = slurp(dir.file("c.log"));
  CHECK(log.find("# per-family=4") != std::string::npos);

  // Missing data files exit 2.
  CHECK(run_cli("train --fasta " + dir.file("missing.fasta") + " --labels " +
                    dir.file("missing.tsv") + " --checkpoint " + dir.file("m.ckpt"),
                dir.file("m.log")) == 2);
}
