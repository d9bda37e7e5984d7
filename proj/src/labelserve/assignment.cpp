// Copyright 2026 The ReviewRanker Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <set>

#include "reviewranker/labelserve.hpp"
#include "reviewranker/random.hpp"

namespace reviewranker::labelserve {

using corpus::OperationType;

const LabelingSession* Assignment::find(const std::string& labeler) const {
  for (const auto& s : sessions) {
    if (s.labeler_id == labeler) return &s;
  }
  return nullptr;
}

Assignment assign_reviews(std::span<const std::string> ids, std::span<const std::string> labelers,
                          double shared_fraction, std::uint64_t seed) {
  if (ids.empty()) throw std::invalid_argument("cannot assign an empty corpus");
  if (labelers.empty()) throw std::invalid_argument("at least one labeler is required");
  if (!(shared_fraction >= 0.0 && shared_fraction < 1.0)) {
    throw std::invalid_argument("shared fraction must be in [0, 1)");
  }
  std::set<std::string> unique(labelers.begin(), labelers.end());
  if (unique.size() != labelers.size()) throw std::invalid_argument("duplicate labeler id");
  if (unique.contains(kAdminLabeler)) {
    throw std::invalid_argument(std::string("'") + kAdminLabeler + "' is reserved");
  }

  std::vector<std::string> order(ids.begin(), ids.end());
  Rng rng(seed);
  rng.shuffle(std::span<std::string>(order));

  const double exact = shared_fraction * static_cast<double>(order.size());
  // The small slack keeps e.g. 0.1 * 30 = 3.0000000000000004 at 3.
  auto shared = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  shared = std::min(shared, order.size());

  Assignment out;
  out.shared_pool.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(shared));
  const std::size_t rest = order.size() - shared;
  const std::size_t base = rest / labelers.size();
  const std::size_t extra = rest % labelers.size();
  std::size_t pos = shared;
  for (std::size_t l = 0; l < labelers.size(); ++l) {
    LabelingSession s;
    s.labeler_id = labelers[l];
    s.assigned_ids = out.shared_pool;
    const std::size_t n = base + (l < extra ? 1 : 0);
    s.assigned_ids.insert(s.assigned_ids.end(), order.begin() + static_cast<std::ptrdiff_t>(pos),
                          order.begin() + static_cast<std::ptrdiff_t>(pos + n));
    pos += n;
    out.sessions.push_back(std::move(s));
  }
  return out;
}

std::vector<FieldError> validate_submission(const corpus::ReviewLabel& label,
                                            std::vector<std::string>* warnings) {
  std::vector<FieldError> errors;
  const OperationType op = label.operation;
  const bool add_enabled = op == OperationType::Insert || op == OperationType::Replace;
  const bool remove_enabled = op == OperationType::Delete || op == OperationType::Replace;

  if (op == OperationType::NotEnoughInformation) {
    if (label.add_understood) {
      errors.push_back({"add_understood", "must be 0 for Not Enough Information"});
    }
    if (label.remove_understood) {
      errors.push_back({"remove_understood", "must be 0 for Not Enough Information"});
    }
  }
  if (!label.add_snippet.empty()) {
    if (!add_enabled) {
      errors.push_back({"add_snippet", "Add Code is only used for Insert and Replace"});
    } else if (!label.add_understood) {
      errors.push_back({"add_snippet", "set add_understood to 1 when providing code to add"});
    }
  }
  if (!label.remove_snippet.empty()) {
    if (!remove_enabled) {
      errors.push_back({"remove_snippet", "Remove Code is only used for Delete and Replace"});
    } else if (!label.remove_understood) {
      errors.push_back({"remove_snippet", "set remove_understood to 1 when providing code to remove"});
    }
  }
  if (warnings) {
    if (add_enabled && label.add_understood && label.add_snippet.empty()) {
      warnings->push_back("add_understood is 1 but no Add Code snippet was given");
    }
    if (remove_enabled && label.remove_understood && label.remove_snippet.empty()) {
      warnings->push_back("remove_understood is 1 but no Remove Code snippet was given");
    }
  }
  return errors;
}

}  // namespace reviewranker::labelserve
