#include <doctest.h>

#include <string>

#include "config.hpp"
#include "cost.hpp"
#include "error.hpp"

using namespace seqnas;

TEST_CASE("desk defaults resolve to a valid runnable config") {
  RunConfig cfg = default_config();
  CHECK_FALSE(cfg.resolved);
  resolve_config(cfg);
  CHECK(cfg.resolved);

  CHECK(cfg.space.L == 8);
  CHECK(cfg.space.input_h == 16);
  CHECK(cfg.space.input_w == 32);
  CHECK(cfg.space.c1 == 1);
  CHECK(cfg.space.c2 == 8);

  // Derived defaults: budget doubles the all-mb3e1 cost of the first typical
  // path, G equals the budget, the surrogate target is half the budget, and
  // the per-module seeds fall back to the master seed.
  Architecture base;
  base.space = cfg.space;
  base.path = typical_paths(cfg.space)[0];
  base.ops.assign(cfg.space.L, *find_op("mb3e1"));
  CHECK(cfg.budget_macs == 2 * arch_cost(base).total_macs);
  CHECK(cfg.reg_g == static_cast<double>(cfg.budget_macs));
  CHECK(cfg.surrogate_target_macs == cfg.budget_macs / 2);
  CHECK(cfg.surrogate_seed == cfg.seed);
  CHECK(cfg.data_seed == cfg.seed);

  const SearchRun run = to_search_run(cfg);
  CHECK_NOTHROW(run.validate());
  CHECK(run.budget_macs == cfg.budget_macs);
  CHECK(run.batch == cfg.batch);
  CHECK(run.data == nullptr);
}

TEST_CASE("explicit values survive resolution") {
  RunConfig cfg = default_config();
  apply_kv(cfg, "seed", "9");
  apply_kv(cfg, "budget_macs", "123456");
  apply_kv(cfg, "reg.G", "5000");
  apply_kv(cfg, "surrogate.seed", "77");
  apply_kv(cfg, "surrogate.target_macs", "42000");
  apply_kv(cfg, "data.seed", "88");
  resolve_config(cfg);
  CHECK(cfg.seed == 9);
  CHECK(cfg.budget_macs == 123456);
  CHECK(cfg.reg_g == 5000.0);
  CHECK(cfg.surrogate_seed == 77);
  CHECK(cfg.surrogate_target_macs == 42000);
  CHECK(cfg.data_seed == 88);
}

TEST_CASE("config text parsing: comments, blanks, and errors") {
  RunConfig cfg = default_config();
  const std::string text =
      "# a comment\n"
      "\n"
      "seed = 4\n"
      "; another comment style\n"
      "train.batch = 16\n"
      "space.channels = 8, 12, 16, 20\n";
  apply_config_text(cfg, text, "inline");
  CHECK(cfg.seed == 4);
  CHECK(cfg.batch == 16);
  CHECK(cfg.space.channels == std::vector<int>{8, 12, 16, 20});

  CHECK_THROWS_AS(apply_config_text(cfg, "seed 4\n", "inline"), Error);
  CHECK_THROWS_AS(apply_kv(cfg, "nonsense.key", "1"), Error);
  CHECK_THROWS_AS(apply_kv(cfg, "seed", "not-a-number"), Error);
  CHECK_THROWS_AS(apply_kv(cfg, "train.batch", "3x"), Error);
  CHECK_THROWS_AS(apply_kv(cfg, "reg.beta", ""), Error);
  CHECK_THROWS_AS(apply_kv(cfg, "backend", "quantum"), Error);
  CHECK_THROWS_AS(apply_kv(cfg, "data.classes", "300"), Error);
}

TEST_CASE("snapshot round trips through parse and resolve") {
  RunConfig cfg = default_config();
  apply_kv(cfg, "seed", "21");
  apply_kv(cfg, "reg.beta", "0.6");
  apply_kv(cfg, "backend", "neural");
  apply_kv(cfg, "data.noise", "0.25");
  resolve_config(cfg);
  const std::string snap = config_snapshot(cfg);

  RunConfig back = default_config();
  apply_config_text(back, snap, "snapshot");
  resolve_config(back);
  CHECK(config_snapshot(back) == snap);

  // Snapshot carries every derived value explicitly.
  CHECK(snap.find("budget_macs = ") != std::string::npos);
  CHECK(snap.find("reg.G = ") != std::string::npos);
  CHECK(snap.find("surrogate.target_macs = ") != std::string::npos);
  CHECK(snap.find("backend = neural") != std::string::npos);

  // Snapshots of unresolved configs are refused: hidden defaults would leak.
  RunConfig raw = default_config();
  CHECK_THROWS_AS(config_snapshot(raw), Error);
}

TEST_CASE("resolution validates the assembled pieces") {
  {
    RunConfig cfg = default_config();
    apply_kv(cfg, "space.input_h", "20");  // not c1 * 2^(a+b)
    CHECK_THROWS_AS(resolve_config(cfg), Error);
  }
  {
    RunConfig cfg = default_config();
    apply_kv(cfg, "reg.beta", "-1");
    CHECK_THROWS_AS(resolve_config(cfg), Error);
  }
  {
    RunConfig cfg = default_config();
    apply_kv(cfg, "data.noise", "1.5");
    CHECK_THROWS_AS(resolve_config(cfg), Error);
  }
  {
    RunConfig cfg = default_config();
    CHECK_THROWS_AS(apply_kv(cfg, "budget_macs", "-5"), Error);
  }
}

TEST_CASE("surrogate spec and dataset builders read the resolved keys") {
  RunConfig cfg = default_config();
  apply_kv(cfg, "surrogate.w_cost", "0.4");
  apply_kv(cfg, "surrogate.seed", "123");
  apply_kv(cfg, "data.n", "24");
  apply_kv(cfg, "data.noise", "0");
  apply_kv(cfg, "data.jitter", "0");
  resolve_config(cfg);

  const SurrogateSpec spec = surrogate_spec(cfg);
  CHECK(spec.seed == 123);
  CHECK(spec.w_cost == 0.4);
  CHECK(spec.target_macs == cfg.surrogate_target_macs);

  const Dataset ds = make_dataset(cfg);
  CHECK(ds.count == 24);
  CHECK(ds.h == cfg.space.input_h);
  CHECK(ds.w == cfg.space.input_w);
  CHECK(ds.classes == cfg.data_classes);
  CHECK(ds.frames() == cfg.space.input_w / (1 << cfg.space.a));

  // Same config, same bytes.
  const Dataset ds2 = make_dataset(cfg);
  CHECK(ds2.pixels == ds.pixels);
}
