#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kbgan/checkpoint.hpp"
#include "support/synthetic_kg.hpp"

namespace fs = std::filesystem;
using namespace kbgan;

namespace {

struct RunResult {
  int status;
  std::string output;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(KBGAN_CLI) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  const int raw = pclose(pipe);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path workdir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("kbgan_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_split(const fs::path& path, const Dataset& ds, const std::vector<Triple>& triples) {
  std::ofstream out(path);
  for (const auto& x : triples) {
    out << ds.vocab.entity_name(x.h) << '\t' << ds.vocab.relation_name(x.r) << '\t' << ds.vocab.entity_name(x.t)
        << '\n';
  }
}

fs::path write_dataset(const fs::path& root) {
  const auto ds = testing::make_random_kg(25, 3, 150, 20, 20, 51);
  const auto dir = root / "data";
  fs::create_directories(dir);
  write_split(dir / "train.txt", ds, ds.triples.train);
  write_split(dir / "valid.txt", ds, ds.triples.valid);
  write_split(dir / "test.txt", ds, ds.triples.test);
  return dir;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

const std::string kQuick = " --epochs 4 --eval-every 2 --batches-per-epoch 3 --seed 9";

}  // namespace

TEST_CASE("pretrain writes checkpoints, curve and config") {
  const auto root = workdir("pretrain");
  const auto data = write_dataset(root);
  const auto out = root / "transe";
  const auto r = run("pretrain --preset wn18rr-transe --dataset " + q(data) + " --out " + q(out) + kQuick);
  REQUIRE_MESSAGE(r.status == 0, r.output);
  for (const char* f : {"best.ckpt", "final.ckpt", "curve.tsv", "config.txt"}) CHECK(fs::exists(out / f));

  const auto ckpt = load_checkpoint(out / "best.ckpt");
  CHECK(ckpt.params.spec.kind == ModelKind::TransE);
  CHECK(ckpt.params.spec.k == 50);
  CHECK(ckpt.params.spec.norm == Norm::L1);
  CHECK(ckpt.vocab.num_entities() == 25);

  const std::string config = slurp(out / "config.txt");
  for (const char* key : {"model = transe", "k = 50", "gamma = 3", "preset = wn18rr-transe", "seed = 9",
                          "adam_alpha = 0.001", "precision = f32"}) {
    CHECK_MESSAGE(config.find(key) != std::string::npos, key);
  }
  const std::string curve = slurp(out / "curve.tsv");
  CHECK(curve.rfind("epoch\tvalid_mrr_x100", 0) == 0);
  CHECK(std::count(curve.begin(), curve.end(), '\n') == 3);
}

TEST_CASE("presets carry the dataset-specific regularization") {
  const auto root = workdir("presets");
  const auto data = write_dataset(root);
  run("pretrain --preset fb15k237-distmult --dataset " + q(data) + " --out " + q(root / "a") + kQuick);
  run("pretrain --preset wn18rr-complex --dataset " + q(data) + " --out " + q(root / "b") + kQuick);
  CHECK(slurp(root / "a" / "config.txt").find("lambda = 1\n") != std::string::npos);
  const auto b = slurp(root / "b" / "config.txt");
  CHECK(b.find("lambda = 0.10000000000000001\n") != std::string::npos);
  CHECK(b.find("k = 25\n") != std::string::npos);
}

TEST_CASE("a missing dataset fails without creating outputs") {
  const auto root = workdir("missing");
  const auto out = root / "out";
  const auto r = run("pretrain --model transe --dataset " + q(root / "nope") + " --out " + q(out));
  CHECK(r.status != 0);
  CHECK(r.output.find("error:") != std::string::npos);
  CHECK_FALSE(fs::exists(out));
  CHECK(run("pretrain --dataset x --out y").status != 0);
  CHECK(run("pretrain --model transe --norm l3 --dataset x --out y").status != 0);
}

TEST_CASE("64-bit reruns are bitwise identical") {
  const auto root = workdir("determinism");
  const auto data = write_dataset(root);
  for (const char* out : {"a", "b"}) {
    const auto r = run("pretrain --model transd --k 8 --dataset " + q(data) + " --out " + q(root / out) + kQuick +
                       " --precision f64");
    REQUIRE_MESSAGE(r.status == 0, r.output);
  }
  CHECK(slurp(root / "a" / "curve.tsv") == slurp(root / "b" / "curve.tsv"));
  CHECK(slurp(root / "a" / "final.ckpt") == slurp(root / "b" / "final.ckpt"));
  CHECK(slurp(root / "a" / "best.ckpt") == slurp(root / "b" / "best.ckpt"));
}

TEST_CASE("advtrain, eval and inspect-negatives") {
  const auto root = workdir("adv");
  const auto data = write_dataset(root);
  REQUIRE(run("pretrain --model transe --k 8 --dataset " + q(data) + " --out " + q(root / "dis") + kQuick).status == 0);
  REQUIRE(run("pretrain --model distmult --k 8 --dataset " + q(data) + " --out " + q(root / "gen") + kQuick).status ==
          0);
  const auto gen = root / "gen" / "best.ckpt";
  const auto dis = root / "dis" / "best.ckpt";

  SUBCASE("roles are checked") {
    const auto r = run("advtrain --dataset " + q(data) + " --out " + q(root / "bad") + " --generator " + q(dis) +
                       " --discriminator " + q(dis));
    CHECK(r.status != 0);
    CHECK(r.output.find("generator") != std::string::npos);
  }
  SUBCASE("adversarial run") {
    const auto out = root / "kbgan";
    const auto r = run("advtrain --dataset " + q(data) + " --out " + q(out) + " --generator " + q(gen) +
                       " --discriminator " + q(dis) + " --ns 5" + kQuick);
    REQUIRE_MESSAGE(r.status == 0, r.output);
    for (const char* f : {"best.ckpt", "final.ckpt", "generator.ckpt", "curve.tsv", "config.txt"}) {
      CHECK(fs::exists(out / f));
    }
    CHECK(load_checkpoint(out / "generator.ckpt").params.spec.kind == ModelKind::DistMult);
    CHECK(slurp(out / "config.txt").find("ns = 5\n") != std::string::npos);
  }
  SUBCASE("eval") {
    const auto r = run("eval --checkpoint " + q(dis) + " --dataset " + q(data) + " --out " + q(root / "ev"));
    REQUIRE_MESSAGE(r.status == 0, r.output);
    CHECK(r.output.find("MRR: ") != std::string::npos);
    CHECK(r.output.find("ranked: 40") != std::string::npos);
    CHECK(fs::exists(root / "ev" / "report.tsv"));
    CHECK(fs::exists(root / "ev" / "ranks.tsv"));
    const auto t = run("eval --split train --checkpoint " + q(dis) + " --dataset " + q(data));
    CHECK(t.output.find("diagnostic") != std::string::npos);
  }
  SUBCASE("inspect-negatives") {
    const auto none = run("inspect-negatives --examples 0 --generator " + q(gen) + " --dataset " + q(data));
    CHECK(none.status == 0);
    CHECK(std::count(none.output.begin(), none.output.end(), '\n') == 1);
    const auto some = run("inspect-negatives --examples 2 --show 3 --generator " + q(gen) + " --discriminator " +
                          q(dis) + " --dataset " + q(data));
    CHECK(some.status == 0);
    CHECK(std::count(some.output.begin(), some.output.end(), '\n') == 7);
  }
}
