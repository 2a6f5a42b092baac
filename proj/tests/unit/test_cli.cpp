#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "roadplan/scheduler.hpp"

namespace fs = std::filesystem;
using namespace roadplan;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

class Workspace {
 public:
  Workspace() {
    dir_ = fs::temp_directory_path() / ("roadplan_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    auto c = fixtures::six_upgrade_case();
    spit(path("grid_net.tntp"), serialize_network(c.net));
    spit(path("grid_node.tntp"), serialize_nodes(c.net));
    spit(path("grid_trips.tntp"), serialize_demand(c.demand));
    spit(path("six.upgrades"), serialize_upgrades(c.set));
    UpgradeSet eight = c.set;
    for (auto [id, a, b] : {std::tuple{"u7", 2, 3}, std::tuple{"u8", 14, 15}}) {
      Upgrade u;
      u.id = id;
      u.cost = 150;
      for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
        LinkModification m;
        m.selector = LinkSelector{x, y, 0};
        m.capacity = 700.0;
        u.modifications.push_back(m);
      }
      eight.upgrades.push_back(u);
    }
    spit(path("eight.upgrades"), serialize_upgrades(eight));
  }
  ~Workspace() { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  Run run(const std::string& args) const {
    const std::string out = path("stdout.txt");
    const std::string err = path("stderr.txt");
    const std::string cmd =
        std::string(ROADPLAN_CLI_PATH) + " " + args + " >" + out + " 2>" + err;
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  std::string grid(const std::string& gap = "1e-4") const {
    return " --net " + path("grid_net.tntp") + " --trips " + path("grid_trips.tntp") +
           " --nodes " + path("grid_node.tntp") + " --gap " + gap + " --max-iters 200000";
  }

 private:
  fs::path dir_;
};

double field(const std::string& text, const std::string& key) {
  const auto pos = text.find(key);
  REQUIRE(pos != std::string::npos);
  return std::stod(text.substr(pos + key.size()));
}

std::string sf_args() {
  const std::string d = ROADPLAN_TEST_DATA_DIR;
  return " --net " + d + "/SiouxFalls_net.tntp --trips " + d + "/SiouxFalls_trips.tntp";
}

}  // namespace

TEST_CASE("solve") {
  Workspace ws;
  SUBCASE("Sioux Falls reaches the requested gap") {
    const Run r = ws.run("solve" + sf_args() + " --gap 1e-4 --max-iters 2000");
    CHECK(r.code == 0);
    CHECK(field(r.out, "relative_gap ") <= 1e-4);
    CHECK(field(r.out, "VHT ") > 0.0);
  }
  SUBCASE("flow files do not depend on the thread count") {
    const Run a = ws.run("solve" + sf_args() + " --gap 1e-3 --threads 1 --out " + ws.path("f1"));
    const Run b = ws.run("solve" + sf_args() + " --gap 1e-3 --threads 8 --out " + ws.path("f8"));
    CHECK(a.code == 0);
    CHECK(b.code == 0);
    CHECK(slurp(ws.path("f1")) == slurp(ws.path("f8")));
    CHECK(!slurp(ws.path("f1")).empty());
  }
  SUBCASE("missing trips file") {
    const Run r = ws.run("solve --net " + std::string(ROADPLAN_TEST_DATA_DIR) +
                         "/SiouxFalls_net.tntp --trips " + ws.path("nope.tntp"));
    CHECK(r.code == 2);
    CHECK(r.err.find(ws.path("nope.tntp")) != std::string::npos);
  }
  SUBCASE("iteration limit is a solver failure") {
    const Run r = ws.run("solve" + sf_args() + " --gap 1e-9 --max-iters 3");
    CHECK(r.code == 3);
  }
}

TEST_CASE("usage errors") {
  Workspace ws;
  CHECK(ws.run("").code == 1);
  CHECK(ws.run("solve --gap -1" + sf_args()).code == 1);
  CHECK(ws.run("solve --bogus").code == 1);
  CHECK(ws.run("solve").code == 1);
  CHECK(ws.run("--help").code == 0);
}

TEST_CASE("config file supplies defaults and flags win") {
  Workspace ws;
  const std::string d = ROADPLAN_TEST_DATA_DIR;
  spit(ws.path("run.toml"), "net = \"" + d + "/SiouxFalls_net.tntp\"\ntrips = \"" + d +
                                "/SiouxFalls_trips.tntp\"\ngap = 1e-2\n");
  const Run loose = ws.run("--config " + ws.path("run.toml") + " solve");
  CHECK(loose.code == 0);
  const Run tight = ws.run("--config " + ws.path("run.toml") + " solve --gap 1e-3");
  CHECK(tight.code == 0);
  CHECK(field(tight.out, "relative_gap ") <= 1e-3);
  CHECK(field(tight.out, "iterations ") > field(loose.out, "iterations "));
}

TEST_CASE("deltas, prediction and selection") {
  Workspace ws;
  const std::string cache = ws.path("eight.cache");
  const std::string common = ws.grid() + " --upgrades " + ws.path("eight.upgrades");

  const Run first = ws.run("deltas --mode individual --cache " + cache + common);
  REQUIRE(first.code == 0);
  CHECK(field(first.out, "new_solves ") == 9);  // baseline + 8
  CHECK(field(first.out, "cached_subsets ") == 8);

  const Run again = ws.run("deltas --mode individual --cache " + cache + common);
  CHECK(again.code == 0);
  CHECK(field(again.out, "new_solves ") == 0);

  spit(ws.path("one.pairs"), "u1 u2\n");
  const Run pairs =
      ws.run("deltas --mode pairs --pairs-file " + ws.path("one.pairs") + " --cache " + cache +
             common);
  CHECK(pairs.code == 0);
  CHECK(field(pairs.out, "new_solves ") == 1);
  CHECK(field(pairs.out, "cached_subsets ") == 9);

  const Run stale =
      ws.run("deltas --cache " + cache + ws.grid("1e-3") + " --upgrades " + ws.path("eight.upgrades"));
  CHECK(stale.code == 2);

  const Run predicted = ws.run("predict-pairs --pairs-count 3" + common);
  CHECK(predicted.code == 0);
  std::istringstream lines(predicted.out);
  int n = 0;
  for (std::string line; std::getline(lines, line);) {
    if (!line.empty() && line[0] != '#') ++n;
  }
  CHECK(n == 3);

  const Run zero = ws.run("select --budget 0 --cache " + cache + " --upgrades " +
                          ws.path("eight.upgrades"));
  CHECK(zero.code == 0);
  CHECK(zero.out.find("chosen:\n") == 0);

  const Run some = ws.run("select --budget 1000 --cache " + cache + " --upgrades " +
                          ws.path("eight.upgrades") + " --out " + ws.path("sel.txt"));
  CHECK(some.code == 0);
  CHECK(field(some.out, "spend: ") <= 1000.0);
  CHECK(slurp(ws.path("sel.txt")) == some.out);

  const Run missing = ws.run("select --budget 1000 --cache " + cache + " --upgrades " +
                             ws.path("six.upgrades"));
  CHECK(missing.code == 2);
}

TEST_CASE("error table from an all-subsets cache") {
  Workspace ws;
  const std::string cache = ws.path("six.cache");
  const std::string common = ws.grid() + " --upgrades " + ws.path("six.upgrades");
  const Run d = ws.run("deltas --mode all-subsets --cache " + cache + common);
  REQUIRE(d.code == 0);
  CHECK(field(d.out, "cached_subsets ") == 63);
  spit(ws.path("sig.pairs"), "u1 u2\nu3 u4\n");
  const Run r = ws.run("errors --cache " + cache + " --upgrades " + ws.path("six.upgrades") +
                       " --pairs-file " + ws.path("sig.pairs"));
  REQUIRE(r.code == 0);
  CHECK(r.out.find("significant pairwise") != std::string::npos);
  CHECK(r.out.find("all subsets size <= 5") != std::string::npos);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 7);  // header + 6 rows
}

TEST_CASE("select from a problem file") {
  Workspace ws;
  spit(ws.path("p.txt"), "3\na 300 120.5\nb 1000 400\nc 50 -3\nb a -20\nBUDGET 1200\n");
  const Run r = ws.run("select --problem " + ws.path("p.txt"));
  CHECK(r.code == 0);
  CHECK(r.out.find("chosen: b") == 0);
  spit(ws.path("bad.txt"), "1\na 1 1\na zz 3\nBUDGET 1\n");
  const Run bad = ws.run("select --problem " + ws.path("bad.txt"));
  CHECK(bad.code == 2);
  CHECK(bad.err.find("line 3") != std::string::npos);
}

TEST_CASE("schedule") {
  Workspace ws;
  const std::string common = ws.grid() + " --upgrades " + ws.path("six.upgrades");

  SUBCASE("greedy on the grid fixture validates") {
    const Run r = ws.run("schedule --budgets 500,900,1000 --pairs-threshold 1.5 --out " +
                         ws.path("plan.txt") + common);
    REQUIRE(r.code == 0);
    CHECK(r.out.find("Expenditure") != std::string::npos);
    CHECK(r.out.find("NPV") != std::string::npos);
    std::istringstream listing(slurp(ws.path("plan.txt")));
    std::string hash, tag;
    double npv = 0.0;
    listing >> hash >> tag >> npv;
    CHECK(tag == "npv");
    const auto c = fixtures::six_upgrade_case();
    Schedule s;
    s.period.assign(c.set.size(), -1);
    std::string id;
    int t = 0;
    while (listing >> id >> t) s.period[*c.set.index_of(id)] = t;
    PlanningHorizon h;
    h.budgets = {500, 900, 1000};
    CHECK(check_schedule(c.set, h, s).feasible());
  }
  SUBCASE("one period at zero rate matches select") {
    const std::string cache = ws.path("six.cache");
    REQUIRE(ws.run("deltas --mode pairs --pairs-threshold 1.5 --cache " + cache + common).code ==
            0);
    const Run sel = ws.run("select --budget 1000 --cache " + cache + " --upgrades " +
                           ws.path("six.upgrades"));
    const Run sch = ws.run("schedule --budgets 1000 --rate 0 --pairs-threshold 1.5 --out " +
                           ws.path("plan1.txt") + common);
    REQUIRE(sel.code == 0);
    REQUIRE(sch.code == 0);
    std::istringstream listing(slurp(ws.path("plan1.txt")));
    std::string hash, tag;
    double npv = 0.0;
    listing >> hash >> tag >> npv;
    std::string chosen = "chosen:";
    std::string id;
    int t = 0;
    while (listing >> id >> t) {
      if (t == 1) chosen += " " + id;
    }
    CHECK(sel.out.substr(0, sel.out.find('\n')) == chosen);
    CHECK(npv == doctest::Approx(field(sel.out, "objective: ")).epsilon(1e-9));
  }
  SUBCASE("independent method") {
    const Run r = ws.run("schedule --method independent --budgets 600,600" + common);
    CHECK(r.code == 0);
  }
  SUBCASE("recomputing a listing") {
    spit(ws.path("mine.txt"), "u1 1\nu3 2\nu4 2\n");
    const Run r = ws.run("schedule --budgets 500,900 --evaluate " + ws.path("mine.txt") + common);
    CHECK(r.code == 0);
    CHECK(r.out.find("NPV") != std::string::npos);
    spit(ws.path("over.txt"), "u1 1\nu2 1\n");
    CHECK(ws.run("schedule --budgets 500,900 --evaluate " + ws.path("over.txt") + common).code ==
          2);
    const Run ind = ws.run("schedule --method independent --actual --budgets 600,600" + common);
    CHECK(ind.code == 0);
    CHECK(ind.out.find("actual_npv ") != std::string::npos);
  }
  SUBCASE("missing budgets") { CHECK(ws.run("schedule" + common).code == 1); }
}
