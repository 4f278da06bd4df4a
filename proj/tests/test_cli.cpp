#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

const fs::path kFixtures{KBQA_FIXTURE_DIR};
const std::string kCli{KBQA_CLI_PATH};

struct CliResult {
  int exit_code;
  std::string stdout_text;
};

CliResult run_cli(const std::string& args) {
  auto dir = fs::temp_directory_path() / "kbqa_cli_test";
  fs::create_directories(dir);
  auto out_path = dir / "stdout.txt";
  int status =
      std::system((kCli + " " + args + " > " + out_path.string()).c_str());
  std::ifstream in(out_path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, buf.str()};
}

std::string fixture_flags() {
  std::ostringstream flags;
  flags << " --entities " << (kFixtures / "kb_entities.tsv") << " --popularity "
        << (kFixtures / "kb_popularity.tsv") << " --relations "
        << (kFixtures / "kb_relations.txt") << " --triples "
        << (kFixtures / "kb_triples.tsv") << " --train-pool "
        << (kFixtures / "train_pool.jsonl");
  return flags.str();
}

}  // namespace

TEST_CASE("cli: no subcommand and bad flags are usage errors") {
  CHECK(run_cli("2> /dev/null").exit_code == 2);
  CHECK(run_cli("run --no-such-flag 2> /dev/null").exit_code == 2);
  CHECK(run_cli("run --dataset missing.jsonl" + fixture_flags() +
                " --llm-fixture none.jsonl 2> /dev/null")
            .exit_code == 2);
}

TEST_CASE("cli: convert is bidirectional and rejects malformed input") {
  auto dir = fs::temp_directory_path() / "kbqa_cli_test";
  fs::create_directories(dir);
  auto input = dir / "exprs.txt";
  {
    std::ofstream out(input);
    out << "(COUNT (JOIN location.location.containedby m.0usa))\n";
  }
  CliResult to_seq = run_cli("convert --to-callseq " + input.string());
  CHECK(to_seq.exit_code == 0);
  CHECK(to_seq.stdout_text.find("expression = COUNT(expression)") !=
        std::string::npos);

  auto program = dir / "program.txt";
  {
    std::ofstream out(program);
    out << to_seq.stdout_text;
  }
  CliResult back = run_cli("convert --to-sexpr " + program.string());
  CHECK(back.exit_code == 0);
  CHECK(back.stdout_text ==
        "(COUNT (JOIN location.location.containedby m.0usa))\n");

  auto junk = dir / "junk.txt";
  {
    std::ofstream out(junk);
    out << "this is not a program\n";
  }
  CHECK(run_cli("convert --to-sexpr " + junk.string() + " 2> /dev/null")
            .exit_code == 2);
  CHECK(run_cli("convert " + junk.string() + " 2> /dev/null").exit_code == 2);
}

TEST_CASE("cli: prompt prints the assembled prompt") {
  CliResult result = run_cli("prompt --question 'who acted in night train'" +
                             fixture_flags() + " --k-shots 1 --seed 1");
  CHECK(result.exit_code == 0);
  CHECK(result.stdout_text.find("def START(entity: str):") != std::string::npos);
  CHECK(result.stdout_text.find("Some relations for reference are as follows:") !=
        std::string::npos);
  const std::string tail = "question = 'who acted in night train'\n";
  REQUIRE(result.stdout_text.size() >= tail.size());
  CHECK(result.stdout_text.substr(result.stdout_text.size() - tail.size()) ==
        tail);
}

TEST_CASE("cli: index builds a cache once and reports missing inputs") {
  auto cache = fs::temp_directory_path() / "kbqa_cli_test" / "cache";
  fs::remove_all(cache);
  std::string cmd = "index" + fixture_flags() + " --cache-dir " + cache.string();
  CliResult first = run_cli(cmd);
  CHECK(first.exit_code == 0);
  CHECK(first.stdout_text.find("built") == 0);
  CliResult second = run_cli(cmd);
  CHECK(second.exit_code == 0);
  CHECK(second.stdout_text.find("up-to-date") == 0);

  CliResult missing = run_cli(
      "index --entities /nope/entities.tsv --relations /nope/relations.txt "
      "--cache-dir " +
      cache.string() + " 2> /dev/null");
  CHECK(missing.exit_code == 2);
}

TEST_CASE("cli: eval aggregates repeated runs with deviations") {
  auto dir = fs::temp_directory_path() / "kbqa_cli_test";
  fs::create_directories(dir);
  std::string base = "run --dataset " + (kFixtures / "dataset_e2e.jsonl").string() +
                     fixture_flags() +
                     " --llm-fixture " + (kFixtures / "llm_e2e.jsonl").string() +
                     " --k-shots 2 --me 5 --mr 10 --samples 1";
  CHECK(run_cli(base + " --out " + (dir / "r1.jsonl").string()).exit_code == 0);
  CHECK(run_cli(base + " --out " + (dir / "r2.jsonl").string()).exit_code == 0);

  CliResult report = run_cli(
      "eval --records " + (dir / "r1.jsonl").string() + " --records " +
      (dir / "r2.jsonl").string() + " --dataset " +
      (kFixtures / "dataset_e2e.jsonl").string());
  CHECK(report.exit_code == 0);
  // two identical runs: mean 1.000, deviation 0.000
  CHECK(report.stdout_text.find("1.000(0.000)") != std::string::npos);
}
