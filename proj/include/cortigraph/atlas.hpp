#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cortigraph::atlas {

// The 31 Mindboggle (DKT) cortical regions per hemisphere.
const std::vector<std::string>& mindboggle_regions();

// The 62 reference scout names, "<region> L" then "<region> R" for each region.
std::vector<std::string> mindboggle_scouts();

// Lobe for a scout name such as "superiorfrontal L"; "other" when unknown.
std::string lobe_of(std::string_view scout_name);

// Display order for lobes in chord diagrams.
const std::vector<std::string>& lobe_order();

// Scouts merged into the audio-visual integration scout.
const std::vector<std::string>& avi_scouts();

}  // namespace cortigraph::atlas
