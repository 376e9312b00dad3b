#include "pathgan/nn/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "pathgan/error.hpp"

namespace pathgan {

namespace {
constexpr const char* kHeader = "pathgan-ckpt v1";
}

std::string checkpoint_to_string(const ParamStore& arrays) {
  std::string out = kHeader;
  out += '\n';
  char buf[40];
  for (const std::string& name : arrays.names()) {
    const Array& a = arrays.at(name);
    out += name;
    out += ' ';
    out += std::to_string(a.shape.size());
    for (std::size_t d : a.shape) {
      out += ' ';
      out += std::to_string(d);
    }
    for (double v : a.data) {
      std::snprintf(buf, sizeof(buf), " %.17g", v);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

ParamStore checkpoint_from_string(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHeader) {
    fail(Err::ParseError, "missing checkpoint header '" + std::string(kHeader) + "'");
  }
  ParamStore store;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string name;
    std::size_t ndim = 0;
    if (!(ls >> name >> ndim) || ndim > 8) {
      fail(Err::ParseError, "checkpoint line " + std::to_string(lineno) + ": bad array header");
    }
    std::vector<std::size_t> shape(ndim);
    std::size_t count = 1;
    for (std::size_t i = 0; i < ndim; ++i) {
      if (!(ls >> shape[i])) {
        fail(Err::ParseError, "checkpoint line " + std::to_string(lineno) + ": bad dims");
      }
      count *= shape[i];
    }
    Array& a = store.add(name, shape);
    for (std::size_t i = 0; i < count; ++i) {
      if (!(ls >> a.data[i])) {
        fail(Err::TruncatedData, "checkpoint line " + std::to_string(lineno) + ": expected " +
                                     std::to_string(count) + " values");
      }
    }
    double extra;
    if (ls >> extra) {
      fail(Err::ParseError, "checkpoint line " + std::to_string(lineno) + ": trailing values");
    }
  }
  return store;
}

void save_checkpoint(const std::string& path, const ParamStore& arrays) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Err::ParseError, "cannot write '" + path + "'");
  out << checkpoint_to_string(arrays);
}

ParamStore load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Err::ParseError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_string(ss.str());
}

}  // namespace pathgan
