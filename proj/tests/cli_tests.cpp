#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

namespace {

struct CliResult {
  int exit_code;
  std::string out;
};

CliResult run(const std::string& args) {
  std::string cmd = std::string(OVML_BIN) + " " + args + " 2>/dev/null";
  std::array<char, 4096> buf{};
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  while (fgets(buf.data(), static_cast<int>(buf.size()), p)) out += buf.data();
  int status = pclose(p);
  return {WEXITSTATUS(status), out};
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
}

}  // namespace

TEST_CASE("decide-local exit codes") {
  CHECK(run("decide-local --l1 K --l2 K --mode xd \"[]1 (P(x) & Q(x)) -> []1 P(x)\"").exit_code == 0);
  CHECK(run("decide-local \"[]1 []2 p -> []2 []1 p\"").exit_code == 1);
  CHECK(run("decide-local \"P(x\"").exit_code == 11);
  CHECK(run("decide-local \"E x . __nav(x)\"").exit_code == 11);
  CHECK(run("bogus-command").exit_code >= 10);
}

TEST_CASE("decide-global with certificate") {
  CliResult r = run(
      "decide-global --l1 K --l2 K --mode xd --phi \"true\" "
      "--psi \"A x . []1 P(x) -> []1 A x . P(x)\" --cert /tmp/ovml_cert.txt");
  CHECK(r.exit_code == 1);
  std::ifstream cert("/tmp/ovml_cert.txt");
  std::string first;
  std::getline(cert, first);
  CHECK(!first.empty());
}

TEST_CASE("unknown outcome without fmp assumption") {
  CHECK(run("decide-local --no-assume-fmp-bound \"P(x) -> P(x)\"").exit_code == 2);
}

TEST_CASE("enumerate-quasistates output") {
  CliResult r = run("enumerate-quasistates \"E x . P(x)\"");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("3 quasistates") != std::string::npos);
}

TEST_CASE("check-model round trip through files") {
  CliResult gfmp = run("counterexample-gfmp --k 3 --out /tmp/ovml_gfmp.json");
  CHECK(gfmp.exit_code == 0);
  CliResult chk = run("check-model --model /tmp/ovml_gfmp.json --allow-reserved --global --formula \"" +
                      gfmp.out.substr(0, gfmp.out.find('\n')) + "\"");
  CHECK(chk.exit_code == 0);
  CHECK(chk.out.find("holds") != std::string::npos);
}

TEST_CASE("encoders through the cli") {
  write_file("/tmp/ovml_eqs.txt", "y = 2\nz1 = 1\nz2 = 1\ny = z1 + z2\n");
  CliResult enc =
      run("encode-diophantine --equations /tmp/ovml_eqs.txt --solution y=2,z1=1,z2=1 "
          "--out /tmp/ovml_wit.json");
  CHECK(enc.exit_code == 0);
  // the emitted witness satisfies the printed encoding
  std::string phi = enc.out.substr(0, enc.out.find('\n'));
  CliResult chk =
      run("check-model --model /tmp/ovml_wit.json --global --formula \"" + phi + "\"");
  CHECK(chk.exit_code == 0);

  write_file("/tmp/ovml_machine.txt", "q0: dec r1 -> halt | q0\n");
  CliResult minsky = run("encode-minsky --machine /tmp/ovml_machine.txt --simulate 4 "
                         "--out /tmp/ovml_prefix.json");
  CHECK(minsky.exit_code == 0);
  CHECK(minsky.out.find("init:") != std::string::npos);
}

TEST_CASE("translate-star and its inverse") {
  CliResult r = run("translate-star \"E x . P(x)\"");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("~[]E ~P") != std::string::npos);
  CliResult inv = run("translate-star --inverse \"~[]E ~P\"");
  CHECK(inv.exit_code == 0);
  CHECK(inv.out.find("E x . P(x)") != std::string::npos);
}
