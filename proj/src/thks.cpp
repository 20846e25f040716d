#include "pq/thks.hpp"

namespace pq::thks {

const std::vector<std::string>& labels() {
  static const std::vector<std::string> l{
      "noCC noTV Pass", "noCC noTV Fail", "noCC TV Pass", "noCC TV Fail",
      "CC noTV Pass",   "CC noTV Fail",   "CC TV Pass",   "CC TV Fail",
  };
  return l;
}

const std::vector<std::int64_t>& counts() {
  static const std::vector<std::int64_t> c{175, 246, 201, 215, 240, 140, 231, 152};
  return c;
}

const std::vector<std::pair<std::string, std::string>>& arcs() {
  // Within a result, using neither intervention is preferred and using both
  // is least preferred; noCC-TV and CC-noTV are not comparable. Any Pass is
  // preferred to any Fail.
  static const std::vector<std::pair<std::string, std::string>> a{
      {"CC TV Fail", "noCC TV Fail"},   {"CC TV Fail", "CC noTV Fail"},
      {"noCC TV Fail", "noCC noTV Fail"}, {"CC noTV Fail", "noCC noTV Fail"},
      {"noCC noTV Fail", "CC TV Pass"},
      {"CC TV Pass", "noCC TV Pass"},   {"CC TV Pass", "CC noTV Pass"},
      {"noCC TV Pass", "noCC noTV Pass"}, {"CC noTV Pass", "noCC noTV Pass"},
  };
  return a;
}

PartialOrder order() { return PartialOrder::dag(labels(), arcs(), true); }

}  // namespace pq::thks
