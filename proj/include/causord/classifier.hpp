#pragma once

#include <set>
#include <string>
#include <vector>

#include "causord/forcing.hpp"

namespace causord::classifier {

// Nonempty subset of {T, F, I}; canonical rendering order T, F, I.
struct SevenValue {
  bool t = false, f = false, i = false;

  std::string str() const;
  bool operator==(const SevenValue& o) const {
    return t == o.t && f == o.f && i == o.i;
  }
};

// T iff some c in C forces p; F iff some c forces ~p; I iff p is
// indeterminate at some c. Throws EmptyFamilyError, UnknownContextError.
SevenValue classify(const forcing::KripkeModel& model,
                    const std::set<std::string>& C, const forcing::PropPtr& p);

struct ClassifyRow {
  forcing::PropPtr prop;
  SevenValue value;
  std::vector<std::string> support;  // contexts forcing prop
  std::vector<std::string> refute;   // contexts forcing ~prop
  std::vector<std::string> indet;    // contexts where indeterminate
};

// One row per proposition, in the given order; context lists follow poset
// order, so the report is deterministic.
std::vector<ClassifyRow> classify_report(
    const forcing::KripkeModel& model, const std::set<std::string>& C,
    const std::vector<forcing::PropPtr>& props);

}  // namespace causord::classifier
