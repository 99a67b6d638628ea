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

#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "fedselect/errors.hpp"

namespace fedselect {

/// Index of a client, stable within a round.
using ClientId = std::uint32_t;

/// The clients participating in one round, in cohort order.
using Cohort = std::vector<ClientId>;

/// A value placed at the (conceptually singleton) server.
template <class T>
struct ServerValue {
  T value;
};

template <class T>
ServerValue<T> at_server(T value) {
  return ServerValue<T>{std::move(value)};
}

/// A value distributed across a cohort: one payload per client, stored in
/// cohort order alongside the owning ClientId. Server-side consumers are
/// expected to read it only through aggregates; per-payload access exists
/// for the simulated client side and for tests.
template <class T>
class ClientsValue {
 public:
  ClientsValue() = default;

  ClientsValue(Cohort cohort, std::vector<T> payloads)
      : cohort_(std::move(cohort)), payloads_(std::move(payloads)) {
    if (cohort_.size() != payloads_.size()) {
      throw ShapeMismatch("clients-placed value must hold exactly one payload per cohort member");
    }
  }

  std::size_t size() const { return payloads_.size(); }
  bool empty() const { return payloads_.empty(); }

  ClientId client(std::size_t i) const { return cohort_[i]; }
  const T& at(std::size_t i) const { return payloads_[i]; }
  T& at(std::size_t i) { return payloads_[i]; }

  const Cohort& cohort() const { return cohort_; }
  const std::vector<T>& payloads() const { return payloads_; }

  /// Positions sorted by ascending ClientId. Aggregations consume
  /// payloads in this order so that sums are reproducible no matter how
  /// the cohort was enumerated.
  std::vector<std::size_t> order_by_client() const {
    std::vector<std::size_t> idx(cohort_.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [this](std::size_t a, std::size_t b) {
      return cohort_[a] < cohort_[b];
    });
    return idx;
  }

 private:
  Cohort cohort_;
  std::vector<T> payloads_;
};

/// Sends an identical copy of a server-placed value to every cohort member.
template <class T>
ClientsValue<T> broadcast(const ServerValue<T>& x, const Cohort& cohort) {
  if (cohort.empty()) throw EmptyCohort();
  std::vector<T> payloads(cohort.size(), x.value);
  return ClientsValue<T>(cohort, std::move(payloads));
}

/// Applies a non-federated function to each client payload in place of
/// the old one; placement is unchanged.
template <class T, class F>
auto map_clients(const ClientsValue<T>& values, F&& fn)
    -> ClientsValue<decltype(fn(values.at(0)))> {
  using U = decltype(fn(values.at(0)));
  std::vector<U> mapped;
  mapped.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) mapped.push_back(fn(values.at(i)));
  return ClientsValue<U>(values.cohort(), std::move(mapped));
}

/// Elementwise arithmetic mean over the client payloads, placed at the
/// server. Summation runs in ascending ClientId order.
inline ServerValue<std::vector<double>> aggregate_mean(
    const ClientsValue<std::vector<double>>& values) {
  if (values.empty()) throw EmptyCohort("aggregate over empty cohort");
  const std::size_t dim = values.at(0).size();
  std::vector<double> sum(dim, 0.0);
  for (std::size_t pos : values.order_by_client()) {
    const auto& payload = values.at(pos);
    if (payload.size() != dim) {
      throw ShapeMismatch("client payload shapes differ in aggregate");
    }
    for (std::size_t i = 0; i < dim; ++i) sum[i] += payload[i];
  }
  const double inv = 1.0 / static_cast<double>(values.size());
  for (double& v : sum) v *= inv;
  return at_server(std::move(sum));
}

/// Scalar specialization of the federated mean.
inline ServerValue<double> aggregate_mean(const ClientsValue<double>& values) {
  if (values.empty()) throw EmptyCohort("aggregate over empty cohort");
  double sum = 0.0;
  for (std::size_t pos : values.order_by_client()) sum += values.at(pos);
  return at_server(sum / static_cast<double>(values.size()));
}

}  // namespace fedselect
