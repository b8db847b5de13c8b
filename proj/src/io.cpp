#include "gravdephase/io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "gravdephase/errors.hpp"

namespace gd {

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

void write_spectrum_rows(std::ostream& out, const AngularSpectrum& spectrum) {
  spectrum.validate();
  const std::string method(to_string(spectrum.method));
  for (std::size_t i = 0; i < spectrum.kz.size(); ++i) {
    const cdouble amp = spectrum.amplitude[i];
    out << method << ',' << format_double(spectrum.a) << ',' << format_double(spectrum.kz[i])
        << ',' << format_double(amp.real()) << ',' << format_double(amp.imag()) << ','
        << format_double(std::norm(amp)) << ',';
    if (!spectrum.stderr_amp.empty()) out << format_double(spectrum.stderr_amp[i]);
    out << '\n';
  }
}

void write_ensemble_csv(std::ostream& out, const Ensemble& ensemble) {
  out << "# seed: " << ensemble.seed << '\n' << "x,y,z\n";
  for (const auto& atom : ensemble.atoms) {
    out << format_double(atom.r.x()) << ',' << format_double(atom.r.y()) << ','
        << format_double(atom.r.z()) << '\n';
  }
}

Ensemble read_ensemble_csv(std::istream& in, const Atom& prototype, const Box& box) {
  prototype.validate();
  Ensemble out;
  out.box = box;
  std::string line;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string key = "# seed:";
      if (line.rfind(key, 0) == 0) out.seed = std::stoull(line.substr(key.size()));
      continue;
    }
    if (!header_seen) {
      if (line != "x,y,z") throw ConfigError("ensemble CSV must start with header x,y,z");
      header_seen = true;
      continue;
    }
    std::istringstream row(line);
    Atom atom = prototype;
    char sep1 = 0, sep2 = 0;
    if (!(row >> atom.r.x() >> sep1 >> atom.r.y() >> sep2 >> atom.r.z()) || sep1 != ',' ||
        sep2 != ',') {
      throw ConfigError("malformed ensemble CSV row " + std::to_string(line_no));
    }
    if (!box.contains(atom.r)) {
      throw DomainError("atom on row " + std::to_string(line_no) + " lies outside the box");
    }
    out.atoms.push_back(atom);
    out.weights.push_back(1.0);
  }
  if (out.atoms.empty()) throw ConfigError("ensemble CSV contains no atoms");
  return out;
}

void write_mode_vector_row(std::ostream& out, const PerturbedMode& mode, double z) {
  const Vec3& k = mode.index().k;
  const CVec3 f = mode.polarization_E(z);
  const CVec3 p = mode.polarization_H(z);
  out << format_double(k.x()) << ',' << format_double(k.y()) << ',' << format_double(k.z()) << ','
      << mode.index().s << ',' << format_double(mode.metric().a) << ',' << format_double(z) << ','
      << format_double(mode.amplitude(z)) << ','
      << format_double(mode.phase(0.0, Vec3(0.0, 0.0, z)));
  for (int i = 0; i < 3; ++i) {
    out << ',' << format_double(f[i].real()) << ',' << format_double(f[i].imag());
  }
  for (int i = 0; i < 3; ++i) {
    out << ',' << format_double(p[i].real()) << ',' << format_double(p[i].imag());
  }
  out << '\n';
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace gd
