#include "cortigraph/atlas.hpp"

#include <map>

namespace cortigraph::atlas {

namespace {

const std::map<std::string, std::string, std::less<>>& region_lobes() {
  static const std::map<std::string, std::string, std::less<>> lobes{
      {"caudalanteriorcingulate", "limbic"},
      {"caudalmiddlefrontal", "frontal"},
      {"cuneus", "occipital"},
      {"entorhinal", "temporal"},
      {"fusiform", "temporal"},
      {"inferiorparietal", "parietal"},
      {"inferiortemporal", "temporal"},
      {"insula", "insula"},
      {"isthmuscingulate", "limbic"},
      {"lateraloccipital", "occipital"},
      {"lateralorbitofrontal", "prefrontal"},
      {"lingual", "occipital"},
      {"medialorbitofrontal", "prefrontal"},
      {"middletemporal", "temporal"},
      {"paracentral", "central"},
      {"parahippocampal", "temporal"},
      {"parsopercularis", "frontal"},
      {"parsorbitalis", "prefrontal"},
      {"parstriangularis", "prefrontal"},
      {"pericalcarine", "occipital"},
      {"postcentral", "central"},
      {"posteriorcingulate", "limbic"},
      {"precentral", "central"},
      {"precuneus", "parietal"},
      {"rostralanteriorcingulate", "limbic"},
      {"rostralmiddlefrontal", "prefrontal"},
      {"superiorfrontal", "frontal"},
      {"superiorparietal", "parietal"},
      {"superiortemporal", "temporal"},
      {"supramarginal", "parietal"},
      {"transversetemporal", "temporal"},
  };
  return lobes;
}

}  // namespace

const std::vector<std::string>& mindboggle_regions() {
  static const std::vector<std::string> regions = [] {
    std::vector<std::string> r;
    for (const auto& [name, lobe] : region_lobes()) r.push_back(name);
    return r;
  }();
  return regions;
}

std::vector<std::string> mindboggle_scouts() {
  std::vector<std::string> names;
  for (const auto& r : mindboggle_regions()) {
    names.push_back(r + " L");
    names.push_back(r + " R");
  }
  return names;
}

std::string lobe_of(std::string_view scout_name) {
  auto base = scout_name;
  if (base.size() > 2 && base[base.size() - 2] == ' ' && (base.back() == 'L' || base.back() == 'R')) {
    base.remove_suffix(2);
  }
  const auto& lobes = region_lobes();
  const auto it = lobes.find(base);
  return it == lobes.end() ? "other" : it->second;
}

const std::vector<std::string>& lobe_order() {
  static const std::vector<std::string> order{"prefrontal", "frontal", "central", "parietal", "temporal",
                                              "insula",     "limbic",  "occipital", "other"};
  return order;
}

const std::vector<std::string>& avi_scouts() {
  // Regions named without a hemisphere are taken from the left hemisphere.
  static const std::vector<std::string> names{
      "caudalanteriorcingulate L", "caudalmiddlefrontal L", "fusiform L",         "insula L",
      "lateralorbitofrontal L",    "middletemporal R",      "parsopercularis L",  "parstriangularis L",
      "superiorfrontal L",         "superiorparietal L",    "superiortemporal L", "transversetemporal L",
  };
  return names;
}

}  // namespace cortigraph::atlas
