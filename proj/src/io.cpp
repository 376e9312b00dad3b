#include "pathgan/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pathgan/error.hpp"

namespace pathgan {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Err::ParseError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Err::ParseError, "cannot write '" + path + "'");
  out << content;
}

std::vector<Scanpath> load_scanpaths_planar(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Err::ParseError, "cannot open '" + path + "'");
  std::vector<Scanpath> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(Err::ParseError, path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    Scanpath sp;
    try {
      sp.image_id = j.at("image_id").get<std::string>();
      if (j.contains("observer") && !j["observer"].is_null()) {
        sp.observer_id = j["observer"].get<std::string>();
      }
      for (const auto& fx : j.at("fixations")) {
        if (!fx.is_array() || fx.size() != 3) {
          fail(Err::ParseError, path + ":" + std::to_string(lineno) + ": fixation must be [x,y,t]");
        }
        sp.fixations.push_back({fx[0].get<double>(), fx[1].get<double>(), fx[2].get<double>()});
      }
    } catch (const nlohmann::json::exception& e) {
      fail(Err::ParseError, path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    try {
      validate_scanpath(sp);
    } catch (const Error& e) {
      fail(Err::ValidationError,
           path + ": record " + std::to_string(out.size()) + " (line " + std::to_string(lineno) +
               "): " + e.what());
    }
    out.push_back(std::move(sp));
  }
  return out;
}

void write_scanpaths_planar(const std::string& path, const std::vector<Scanpath>& paths) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Err::ParseError, "cannot write '" + path + "'");
  for (const Scanpath& sp : paths) {
    nlohmann::ordered_json j;
    j["image_id"] = sp.image_id;
    if (sp.observer_id.empty()) {
      j["observer"] = nullptr;
    } else {
      j["observer"] = sp.observer_id;
    }
    nlohmann::json fx = nlohmann::json::array();
    for (const Fixation& f : sp.fixations) fx.push_back({f.x, f.y, f.t});
    j["fixations"] = fx;
    out << j.dump() << "\n";
  }
}

std::vector<Scanpath> load_scanpaths_spherical_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Err::ParseError, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) fail(Err::ParseError, path + ": empty file");
  auto strip = [](std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    return s;
  };
  if (strip(line) != "image,observer,index,lon_deg,lat_deg,t") {
    fail(Err::ParseError, path + ":1: expected header image,observer,index,lon_deg,lat_deg,t");
  }

  struct Row {
    int index;
    Fixation f;
  };
  // keyed by (image, observer) in first-appearance order
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::vector<Row>> groups;

  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip(line);
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) {
      fail(Err::ParseError, path + ":" + std::to_string(lineno) + ": expected 6 columns, got " +
                                std::to_string(cells.size()));
    }
    Row r;
    double lon, lat;
    try {
      r.index = std::stoi(cells[2]);
      lon = std::stod(cells[3]);
      lat = std::stod(cells[4]);
      r.f.t = std::stod(cells[5]);
    } catch (const std::exception&) {
      fail(Err::ParseError, path + ":" + std::to_string(lineno) + ": bad numeric field");
    }
    r.f.x = lon / 360.0 + 0.5;
    r.f.y = 0.5 - lat / 180.0;
    const auto key = std::make_pair(cells[0], cells[1]);
    if (groups.find(key) == groups.end()) order.push_back(key);
    groups[key].push_back(r);
  }

  std::vector<Scanpath> out;
  for (const auto& key : order) {
    std::vector<Row>& rows = groups[key];
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.index < b.index; });
    Scanpath sp;
    sp.image_id = key.first;
    sp.observer_id = key.second;
    for (const Row& r : rows) sp.fixations.push_back(r.f);
    try {
      validate_scanpath(sp);
    } catch (const Error& e) {
      fail(Err::ValidationError, path + ": record " + std::to_string(out.size()) + " (image '" +
                                     key.first + "', observer '" + key.second + "'): " + e.what());
    }
    out.push_back(std::move(sp));
  }
  return out;
}

GtSet group_by_image(const std::vector<Scanpath>& paths) {
  GtSet out;
  for (const Scanpath& sp : paths) out[sp.image_id].push_back(sp);
  return out;
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
bool next_pgm_token(std::istream& in, std::string& tok) {
  tok.clear();
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (!std::isspace(c)) break;
  }
  if (c == EOF) return false;
  do {
    tok.push_back(static_cast<char>(c));
    c = in.get();
  } while (c != EOF && !std::isspace(c) && c != '#');
  if (c == '#') in.unget();
  return true;
}

long parse_pgm_int(const std::string& tok, const std::string& what) {
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos) {
    fail(Err::ParseError, "bad " + what + " '" + tok + "'");
  }
  errno = 0;
  const long v = std::strtol(tok.c_str(), nullptr, 10);
  if (errno != 0) fail(Err::ParseError, what + " out of range");
  return v;
}

}  // namespace

SaliencyMap read_pgm(const std::string& path, int* maxval_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Err::ParseError, "cannot open '" + path + "'");

  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (!in || m0 != 'P' || m1 != '5') {
    fail(Err::BadMagic, path + ": not a binary PGM (P5)");
  }

  std::string tok;
  if (!next_pgm_token(in, tok)) fail(Err::ParseError, path + ": missing width");
  const long w = parse_pgm_int(tok, "width");
  if (!next_pgm_token(in, tok)) fail(Err::ParseError, path + ": missing height");
  const long h = parse_pgm_int(tok, "height");
  if (!next_pgm_token(in, tok)) fail(Err::ParseError, path + ": missing maxval");
  const long maxval = parse_pgm_int(tok, "maxval");

  if (maxval < 1 || maxval > 65535) {
    fail(Err::UnsupportedMaxval, path + ": maxval " + std::to_string(maxval));
  }
  if (w < 1 || h < 1 || w > (1 << 20) || h > (1 << 20) || w * h > (1L << 28)) {
    fail(Err::ParseError, path + ": implausible dimensions " + std::to_string(w) + "x" +
                              std::to_string(h));
  }
  // single whitespace byte separates header from payload (already consumed by
  // the tokenizer's terminating character)

  SaliencyMap map(static_cast<int>(w), static_cast<int>(h));
  const size_t n = static_cast<size_t>(w) * h;
  const bool wide = maxval > 255;
  std::vector<unsigned char> raw(n * (wide ? 2 : 1));
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<size_t>(in.gcount()) != raw.size()) {
    fail(Err::TruncatedData, path + ": expected " + std::to_string(raw.size()) +
                                 " payload bytes, got " + std::to_string(in.gcount()));
  }
  if (wide) {
    for (size_t i = 0; i < n; ++i) {
      map.values[i] = static_cast<double>((raw[2 * i] << 8) | raw[2 * i + 1]);  // big-endian
    }
  } else {
    for (size_t i = 0; i < n; ++i) map.values[i] = static_cast<double>(raw[i]);
  }
  if (maxval_out) *maxval_out = static_cast<int>(maxval);
  return map;
}

void write_pgm(const std::string& path, const SaliencyMap& m, int maxval) {
  if (maxval < 1 || maxval > 65535) fail(Err::UnsupportedMaxval, std::to_string(maxval));
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Err::ParseError, "cannot write '" + path + "'");
  out << "P5\n" << m.width << " " << m.height << "\n" << maxval << "\n";
  const bool wide = maxval > 255;
  for (double v : m.values) {
    long q = std::lround(v);
    if (q < 0) q = 0;
    if (q > maxval) q = maxval;
    if (wide) {
      out.put(static_cast<char>((q >> 8) & 0xff));
      out.put(static_cast<char>(q & 0xff));
    } else {
      out.put(static_cast<char>(q & 0xff));
    }
  }
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  auto trim = [](std::string s) {
    const char* ws = " \t\r";
    const size_t b = s.find_first_not_of(ws);
    if (b == std::string::npos) return std::string();
    const size_t e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail(Err::ParseError, "config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(Err::ParseError, "config line " + std::to_string(lineno) + ": empty key");
    out[key] = value;
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  return parse_config_text(read_text_file(path));
}

}  // namespace pathgan
