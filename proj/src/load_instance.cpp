#include <fstream>
#include <sstream>

#include "cpath/lab.hpp"
#include "cpath/model.hpp"

namespace cpath {

NsdpInstance load_instance(const std::string& source) {
  // Registry names first; anything else must be a QMI file on disk.
  const bool looks_like_path =
      source.find('/') != std::string::npos ||
      source.find(".json") != std::string::npos;
  if (!looks_like_path) {
    try {
      return builtin_instance(source).inst;
    } catch (const NotFoundError&) {
      std::ifstream probe(source);
      if (!probe.good()) throw;
    }
  }
  std::ifstream in(source);
  if (!in.good())
    throw NotFoundError("instance source '" + source +
                        "' is neither a registry name nor a readable file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return make_instance(qmi_from_json(buf.str()));
}

}  // namespace cpath
