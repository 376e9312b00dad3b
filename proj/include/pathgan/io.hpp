#pragma once

#include <map>
#include <string>
#include <vector>

#include "pathgan/assignment.hpp"
#include "pathgan/image.hpp"
#include "pathgan/scanpath.hpp"

namespace pathgan {

// Scanpath files.
//
// planar-lines: one JSON record per line,
//   {"image_id": "...", "observer": "..."|null, "fixations": [[x,y,t], ...]}
// with x, y already normalized to [0,1].
//
// spherical-csv: header `image,observer,index,lon_deg,lat_deg,t`; longitude
// and latitude in degrees, converted onto the equirectangular frame on load.
std::vector<Scanpath> load_scanpaths_planar(const std::string& path);
std::vector<Scanpath> load_scanpaths_spherical_csv(const std::string& path);
void write_scanpaths_planar(const std::string& path, const std::vector<Scanpath>& paths);

GtSet group_by_image(const std::vector<Scanpath>& paths);

// Binary (P5) PGM, maxval <= 65535, 16-bit samples big-endian. Values are
// returned exactly as stored; maxval_out receives the header maxval.
SaliencyMap read_pgm(const std::string& path, int* maxval_out = nullptr);
void write_pgm(const std::string& path, const SaliencyMap& m, int maxval = 255);

// Flat `key = value` configuration text ('#' starts a comment).
std::map<std::string, std::string> read_config_file(const std::string& path);
std::map<std::string, std::string> parse_config_text(const std::string& text);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace pathgan
