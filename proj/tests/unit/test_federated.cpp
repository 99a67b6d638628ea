/*
 * Copyright 2026 The fedselect Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <doctest.h>

#include <cmath>

#include "fedselect/federated.hpp"
#include "fedselect/plans.hpp"
#include "fedselect/rng.hpp"
#include "fedselect/select_plan.hpp"

using namespace fedselect;

namespace {

std::shared_ptr<const ParamLayout> row_layout(std::size_t rows, std::size_t width) {
  return std::make_shared<ParamLayout>(
      std::vector<BlockSpec>{{"rows", {rows, width}, true}});
}

std::vector<double> random_vector(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

}  // namespace

TEST_SUITE("federated primitives") {
  TEST_CASE("broadcast copies the value to every cohort member") {
    const auto out = broadcast(at_server(7), Cohort{0, 1, 2});
    REQUIRE(out.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(out.at(i) == 7);
  }

  TEST_CASE("broadcast to a single client") {
    const auto out = broadcast(at_server(std::vector<double>{1, 2}), Cohort{0});
    REQUIRE(out.size() == 1);
    CHECK(out.at(0) == std::vector<double>{1, 2});
  }

  TEST_CASE("broadcast rejects an empty cohort") {
    CHECK_THROWS_AS(broadcast(at_server(1.0), Cohort{}), EmptyCohort);
  }

  TEST_CASE("aggregate_mean averages scalars") {
    const ClientsValue<double> values(Cohort{0, 1, 2}, {1.0, 2.0, 3.0});
    CHECK(aggregate_mean(values).value == doctest::Approx(2.0));
  }

  TEST_CASE("clients can pre-apply a local map before the mean") {
    const ClientsValue<double> raw(Cohort{0, 1}, {1.4, 2.6});
    const auto rounded = map_clients(raw, [](double v) { return std::round(v); });
    CHECK(aggregate_mean(rounded).value == doctest::Approx(2.0));
  }

  TEST_CASE("mean of a single client is the identity") {
    const ClientsValue<std::vector<double>> values(Cohort{5}, {{3.0, -1.0}});
    CHECK(aggregate_mean(values).value == std::vector<double>{3.0, -1.0});
  }

  TEST_CASE("aggregate_mean rejects mismatched shapes and empty cohorts") {
    const ClientsValue<std::vector<double>> bad(Cohort{0, 1}, {{1.0}, {1.0, 2.0}});
    CHECK_THROWS_AS(aggregate_mean(bad), ShapeMismatch);
    CHECK_THROWS_AS(aggregate_mean(ClientsValue<std::vector<double>>{}), EmptyCohort);
  }

  TEST_CASE("aggregate_mean is invariant to cohort enumeration order") {
    Rng rng(7);
    const std::vector<double> a = random_vector(6, rng);
    const std::vector<double> b = random_vector(6, rng);
    const std::vector<double> c = random_vector(6, rng);
    const auto fwd = aggregate_mean(
        ClientsValue<std::vector<double>>(Cohort{0, 1, 2}, {a, b, c}));
    const auto rev = aggregate_mean(
        ClientsValue<std::vector<double>>(Cohort{2, 0, 1}, {c, a, b}));
    CHECK(fwd.value == rev.value);  // bit-identical, summation is id-ordered
  }
}

TEST_SUITE("federated select") {
  TEST_CASE("key order is respected and rows are picked out") {
    const auto layout = row_layout(3, 2);
    const auto plan = make_row_select_plan(layout, "rows");
    const std::vector<double> x{1, 2, 3, 4, 5, 6};
    const ClientsValue<KeySeq> keys(Cohort{0}, {KeySeq{2, 0}});
    const auto out = fed_select(at_server(x), keys, *plan);
    REQUIRE(out.at(0).size() == 2);
    CHECK(out.at(0)[0] == Slice{5, 6});
    CHECK(out.at(0)[1] == Slice{1, 2});
  }

  TEST_CASE("clients with overlapping keys receive identical slices") {
    const auto plan = make_row_select_plan(row_layout(3, 2), "rows");
    const std::vector<double> x{1, 2, 3, 4, 5, 6};
    const ClientsValue<KeySeq> keys(Cohort{0, 1}, {KeySeq{0}, KeySeq{0}});
    const auto out = fed_select(at_server(x), keys, *plan);
    CHECK(out.at(0)[0] == Slice{1, 2});
    CHECK(out.at(1)[0] == Slice{1, 2});
  }

  TEST_CASE("duplicate keys within one client are honored per position") {
    const auto plan = make_row_select_plan(row_layout(3, 2), "rows");
    const std::vector<double> x{1, 2, 3, 4, 5, 6};
    const ClientsValue<KeySeq> keys(Cohort{0}, {KeySeq{1, 1}});
    const auto out = fed_select(at_server(x), keys, *plan);
    CHECK(out.at(0)[0] == Slice{3, 4});
    CHECK(out.at(0)[1] == Slice{3, 4});
  }

  TEST_CASE("out-of-range keys are rejected with client context") {
    const auto plan = make_row_select_plan(row_layout(3, 2), "rows");
    const std::vector<double> x{1, 2, 3, 4, 5, 6};
    const ClientsValue<KeySeq> keys(Cohort{0}, {KeySeq{3}});
    CHECK_THROWS_AS(fed_select(at_server(x), keys, *plan), KeyOutOfRange);
  }

  TEST_CASE("a constant select function reduces to broadcast") {
    const auto layout = row_layout(4, 2);
    const auto plan = make_full_model_plan(layout, 5);
    Rng rng(3);
    const std::vector<double> x = random_vector(8, rng);
    // Any key yields the whole model, so select == broadcast exactly.
    const ClientsValue<KeySeq> keys(Cohort{0, 1, 2},
                                    {KeySeq{0}, KeySeq{4}, KeySeq{2}});
    const auto selected = fed_select(at_server(x), keys, *plan);
    const auto broadcasted = broadcast(at_server(x), Cohort{0, 1, 2});
    for (std::size_t n = 0; n < 3; ++n) {
      CHECK(selected.at(n)[0] == broadcasted.at(n));
    }
  }
}

TEST_SUITE("deselect aggregation") {
  TEST_CASE("scalar slices scatter to their coordinates and divide by N") {
    const auto plan = make_row_select_plan(row_layout(4, 1), "rows");
    const ClientsValue<KeySeq> keys(Cohort{0, 1}, {KeySeq{0, 1}, KeySeq{1, 2}});
    const ClientsValue<std::vector<Slice>> updates(
        Cohort{0, 1}, {{{1.0}, {1.0}}, {{3.0}, {5.0}}});
    const auto out = aggregate_mean_deselect(updates, keys, *plan);
    CHECK(out.value == std::vector<double>{0.5, 2.0, 2.5, 0.0});
  }

  TEST_CASE("single client scatter fills zeros elsewhere") {
    const auto plan = make_row_select_plan(row_layout(2, 1), "rows");
    const ClientsValue<KeySeq> keys(Cohort{0}, {KeySeq{0}});
    const ClientsValue<std::vector<Slice>> updates(Cohort{0}, {{{2.0}}});
    CHECK(aggregate_mean_deselect(updates, keys, *plan).value ==
          std::vector<double>{2.0, 0.0});
  }

  TEST_CASE("division is by cohort size, not per-key counts") {
    const auto plan = make_row_select_plan(row_layout(2, 1), "rows");
    const ClientsValue<KeySeq> keys(Cohort{0, 1}, {KeySeq{0}, KeySeq{1}});
    const ClientsValue<std::vector<Slice>> updates(Cohort{0, 1}, {{{4.0}}, {{6.0}}});
    CHECK(aggregate_mean_deselect(updates, keys, *plan).value ==
          std::vector<double>{2.0, 3.0});
  }

  TEST_CASE("per-key-count normalization divides by touch counts instead") {
    const auto plan = make_row_select_plan(row_layout(2, 1), "rows");
    const ClientsValue<KeySeq> keys(Cohort{0, 1}, {KeySeq{0}, KeySeq{1}});
    const ClientsValue<std::vector<Slice>> updates(Cohort{0, 1}, {{{4.0}}, {{6.0}}});
    CHECK(aggregate_mean_deselect(updates, keys, *plan,
                                  DeselectNorm::kPerKeyCount)
              .value == std::vector<double>{4.0, 6.0});
  }

  TEST_CASE("length mismatches are rejected") {
    const auto plan = make_row_select_plan(row_layout(2, 1), "rows");
    const ClientsValue<KeySeq> keys(Cohort{0}, {KeySeq{0, 1}});
    const ClientsValue<std::vector<Slice>> updates(Cohort{0}, {{{2.0}}});
    CHECK_THROWS_AS(aggregate_mean_deselect(updates, keys, *plan), ShapeMismatch);
  }

  TEST_CASE("matches the densify-then-mean oracle on random instances") {
    Rng rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t rows = 1 + rng.below(8);
      const std::size_t width = 1 + rng.below(4);
      const std::size_t n_clients = 1 + rng.below(8);
      const auto plan = make_row_select_plan(row_layout(rows, width), "rows");

      Cohort cohort;
      std::vector<KeySeq> keys(n_clients);
      std::vector<std::vector<Slice>> updates(n_clients);
      for (std::size_t n = 0; n < n_clients; ++n) {
        cohort.push_back(static_cast<ClientId>(n));
        const std::size_t m = rng.below(5);  // duplicates allowed, may be empty
        for (std::size_t i = 0; i < m; ++i) {
          keys[n].push_back(rng.below(rows));
          updates[n].push_back(random_vector(width, rng));
        }
      }

      // Independent oracle: densify each client by hand (row k occupies
      // flat offset k*width), then take the plain federated mean.
      std::vector<std::vector<double>> dense(n_clients,
                                             std::vector<double>(rows * width, 0.0));
      for (std::size_t n = 0; n < n_clients; ++n) {
        for (std::size_t i = 0; i < keys[n].size(); ++i) {
          const std::size_t at = static_cast<std::size_t>(keys[n][i]) * width;
          for (std::size_t j = 0; j < width; ++j) dense[n][at + j] += updates[n][i][j];
        }
      }
      const auto expected =
          aggregate_mean(ClientsValue<std::vector<double>>(cohort, dense));

      const auto actual = aggregate_mean_deselect(
          ClientsValue<std::vector<Slice>>(cohort, updates),
          ClientsValue<KeySeq>(cohort, keys), *plan);
      REQUIRE(actual.value.size() == expected.value.size());
      for (std::size_t i = 0; i < actual.value.size(); ++i) {
        CHECK(std::abs(actual.value[i] - expected.value[i]) <= 1e-12);
      }
    }
  }
}

TEST_SUITE("plan composition") {
  TEST_CASE("fusing a broadcast block appends it to every slice") {
    const auto layout = std::make_shared<ParamLayout>(std::vector<BlockSpec>{
        {"rows", {2, 2}, true}, {"bias", {1}, false}});
    const auto plan =
        fuse_broadcast_into_select(make_row_select_plan(layout, "rows"), "bias");
    const std::vector<double> x{1, 2, 3, 4, 9};
    CHECK(plan->slice(x, 1) == Slice{3, 4, 9});
    CHECK(plan->broadcast_size() == 1);
    CHECK(plan->base_slice_size(1) == 2);
  }

  TEST_CASE("fusing an empty block leaves slices unchanged") {
    const auto layout = std::make_shared<ParamLayout>(std::vector<BlockSpec>{
        {"rows", {2, 2}, true}, {"empty", {0}, false}});
    const auto base = make_row_select_plan(layout, "rows");
    const auto fused = fuse_broadcast_into_select(base, "empty");
    const std::vector<double> x{1, 2, 3, 4};
    for (SelectKey k = 0; k < 2; ++k) CHECK(fused->slice(x, k) == base->slice(x, k));
  }

  TEST_CASE("fusing a block the plan already selects collides") {
    const auto layout = row_layout(2, 2);
    CHECK_THROWS_AS(
        fuse_broadcast_into_select(make_row_select_plan(layout, "rows"), "rows"),
        BlockCollision);
  }

  TEST_CASE("one fused select equals select plus broadcast, value for value") {
    const auto layout = std::make_shared<ParamLayout>(std::vector<BlockSpec>{
        {"rows", {4, 3}, true}, {"shared", {2}, false}});
    const auto base = make_row_select_plan(layout, "rows");
    const auto fused = fuse_broadcast_into_select(base, "shared");
    Rng rng(11);
    const std::vector<double> x = random_vector(layout->size(), rng);

    const ClientsValue<KeySeq> keys(Cohort{0, 1}, {KeySeq{1, 3}, KeySeq{0}});
    const auto fused_out = fed_select(at_server(x), keys, *fused);
    const auto base_out = fed_select(at_server(x), keys, *base);
    const auto shared_out = broadcast(
        at_server(std::vector<double>(x.begin() + 12, x.begin() + 14)),
        Cohort{0, 1});

    for (std::size_t n = 0; n < 2; ++n) {
      for (std::size_t i = 0; i < keys.at(n).size(); ++i) {
        Slice expected = base_out.at(n)[i];
        const auto& y = shared_out.at(n);
        expected.insert(expected.end(), y.begin(), y.end());
        CHECK(fused_out.at(n)[i] == expected);
      }
    }
  }

  TEST_CASE("merged plans use mixed-radix composite keys") {
    CHECK(encode_merged_key(1, 2, 3) == 5);
    CHECK(encode_merged_key(0, 0, 3) == 0);
  }

  TEST_CASE("a merged slice is the pair of component slices for all keys") {
    const auto layout = std::make_shared<ParamLayout>(std::vector<BlockSpec>{
        {"a", {2, 2}, true}, {"b", {3, 1}, true}});
    const auto p1 = make_row_select_plan(layout, "a");
    const auto p2 = make_row_select_plan(layout, "b");
    const auto merged = merge_select_plans(p1, p2);
    REQUIRE(merged->keyspace() == 6);

    Rng rng(5);
    const std::vector<double> x = random_vector(layout->size(), rng);
    for (SelectKey k1 = 0; k1 < 2; ++k1) {
      for (SelectKey k2 = 0; k2 < 3; ++k2) {
        Slice expected = p1->slice(x, k1);
        const Slice second = p2->slice(x, k2);
        expected.insert(expected.end(), second.begin(), second.end());
        CHECK(merged->slice(x, encode_merged_key(k1, k2, 3)) == expected);
      }
    }

    SUBCASE("zero key selects the pair of zero slices") {
      Slice expected = p1->slice(x, 0);
      const Slice second = p2->slice(x, 0);
      expected.insert(expected.end(), second.begin(), second.end());
      CHECK(merged->slice(x, 0) == expected);
    }
  }

  TEST_CASE("merging overlapping plans collides") {
    const auto layout = row_layout(2, 2);
    const auto p = make_row_select_plan(layout, "rows");
    CHECK_THROWS_AS(merge_select_plans(p, p), BlockCollision);
  }

  TEST_CASE("merged keyspaces that overflow 64 bits are rejected") {
    const auto two = std::make_shared<ParamLayout>(std::vector<BlockSpec>{
        {"a", {2, 1}, true}, {"b", {2, 1}, true}});
    const auto pa = make_row_select_plan(two, "a");
    const auto pb = make_row_select_plan(two, "b");
    CHECK_THROWS_AS(
        merge_select_plans(flatten_multikey_plan(pa, 40),
                           flatten_multikey_plan(pb, 40)),
        KeyspaceOverflow);
  }

  TEST_CASE("flattened multi-key select uses base-K digits") {
    CHECK(encode_multikey({1, 0}, 2) == 2);
    CHECK(encode_multikey({1, 1}, 2) == 3);
  }

  TEST_CASE("flattened select equals multi-key select on every composite key") {
    const auto layout = row_layout(2, 2);
    const auto base = make_row_select_plan(layout, "rows");
    const auto flat = flatten_multikey_plan(base, 2);
    REQUIRE(flat->keyspace() == 4);

    Rng rng(9);
    const std::vector<double> x = random_vector(4, rng);
    for (SelectKey z1 = 0; z1 < 2; ++z1) {
      for (SelectKey z2 = 0; z2 < 2; ++z2) {
        const ClientsValue<KeySeq> keys(Cohort{0}, {KeySeq{z1, z2}});
        const auto multi = fed_select(at_server(x), keys, *base);
        Slice expected;
        for (const Slice& s : multi.at(0)) {
          expected.insert(expected.end(), s.begin(), s.end());
        }
        CHECK(flat->slice(x, encode_multikey({z1, z2}, 2)) == expected);
      }
    }
  }

  TEST_CASE("flattening with one key is the identity transformation") {
    const auto layout = row_layout(3, 2);
    const auto base = make_row_select_plan(layout, "rows");
    const auto flat = flatten_multikey_plan(base, 1);
    CHECK(flat->keyspace() == base->keyspace());
    Rng rng(4);
    const std::vector<double> x = random_vector(6, rng);
    for (SelectKey k = 0; k < 3; ++k) CHECK(flat->slice(x, k) == base->slice(x, k));
  }

  TEST_CASE("K^m beyond 64 bits is rejected") {
    const auto plan = make_row_select_plan(row_layout(1024, 1), "rows");
    CHECK_THROWS_AS(flatten_multikey_plan(plan, 7), KeyspaceOverflow);
  }
}
