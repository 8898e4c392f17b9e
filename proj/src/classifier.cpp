#include "causord/classifier.hpp"

#include <algorithm>

#include "causord/errors.hpp"

namespace causord::classifier {

std::string SevenValue::str() const {
  std::string s;
  if (t) s += 'T';
  if (f) s += 'F';
  if (i) s += 'I';
  return s;
}

namespace {

// Family as poset indices, sorted, validated.
std::vector<int> family_indices(const forcing::KripkeModel& model,
                                const std::set<std::string>& C) {
  if (C.empty())
    throw EmptyFamilyError("classification needs a nonempty context family");
  std::vector<int> idx;
  idx.reserve(C.size());
  for (const auto& name : C) idx.push_back(model.poset().index_of(name));
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

SevenValue classify(const forcing::KripkeModel& model,
                    const std::set<std::string>& C,
                    const forcing::PropPtr& p) {
  SevenValue v;
  auto np = forcing::neg(p);
  for (int c : family_indices(model, C)) {
    if (model.forces(c, p)) v.t = true;
    if (model.forces(c, np)) v.f = true;
    if (model.indeterminate_at(c, p)) v.i = true;
  }
  return v;
}

std::vector<ClassifyRow> classify_report(
    const forcing::KripkeModel& model, const std::set<std::string>& C,
    const std::vector<forcing::PropPtr>& props) {
  auto idx = family_indices(model, C);
  std::vector<ClassifyRow> rows;
  rows.reserve(props.size());
  for (const auto& p : props) {
    ClassifyRow row;
    row.prop = p;
    auto np = forcing::neg(p);
    for (int c : idx) {
      const std::string& name = model.poset().at(c).name;
      if (model.forces(c, p)) {
        row.value.t = true;
        row.support.push_back(name);
      }
      if (model.forces(c, np)) {
        row.value.f = true;
        row.refute.push_back(name);
      }
      if (model.indeterminate_at(c, p)) {
        row.value.i = true;
        row.indet.push_back(name);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace causord::classifier
