#include "oddvar/ensemble.hpp"

#include <fmt/format.h>

#include <array>
#include <cstring>
#include <fstream>

#include "oddvar/errors.hpp"

namespace oddvar {

namespace {

constexpr std::array<char, 8> kMagic = {'O', 'D', 'D', 'V', 'E', 'N', 'S', '1'};

template <class T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ValidationError("ensemble file truncated");
  return v;
}

}  // namespace

PathEnsemble::PathEnsemble(TimeGrid grid, std::size_t n_paths, std::uint64_t seed, std::string model,
                           std::vector<double> values)
    : grid_(std::move(grid)), n_paths_(n_paths), seed_(seed), model_(std::move(model)), values_(std::move(values)) {
  if (values_.size() != n_paths_ * grid_.points()) throw ValidationError("ensemble: value count does not match grid");
}

PathEnsemble PathEnsemble::scaled(double c) const {
  std::vector<double> v(values_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = c * values_[i];
  return {grid_, n_paths_, seed_, model_, std::move(v)};
}

void PathEnsemble::write_binary(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ValidationError("cannot open " + file.string() + " for writing");
  out.write(kMagic.data(), kMagic.size());
  put(out, grid_.horizon());
  put(out, static_cast<std::uint64_t>(grid_.steps()));
  put(out, static_cast<std::uint64_t>(grid_.ladder().size()));
  for (double e : grid_.ladder()) put(out, e);
  put(out, seed_);
  put(out, static_cast<std::uint64_t>(n_paths_));
  put(out, static_cast<std::uint64_t>(points()));
  put(out, static_cast<std::uint64_t>(model_.size()));
  out.write(model_.data(), static_cast<std::streamsize>(model_.size()));
  for (std::size_t i = 0; i < points(); ++i) {
    for (std::size_t p = 0; p < n_paths_; ++p) put(out, value(p, i));
  }
  if (!out) throw ValidationError("write failed: " + file.string());
}

PathEnsemble PathEnsemble::read_binary(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + file.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw ValidationError(file.string() + " is not an ensemble dump");
  const auto horizon = get<double>(in);
  const auto steps = get<std::uint64_t>(in);
  std::vector<double> ladder(get<std::uint64_t>(in));
  for (double& e : ladder) e = get<double>(in);
  const auto seed = get<std::uint64_t>(in);
  const auto n_paths = get<std::uint64_t>(in);
  const auto points = get<std::uint64_t>(in);
  std::string model(get<std::uint64_t>(in), '\0');
  in.read(model.data(), static_cast<std::streamsize>(model.size()));
  TimeGrid grid(horizon, steps, std::move(ladder));
  if (grid.points() != points) throw ValidationError("ensemble header inconsistent with its grid");
  std::vector<double> values(n_paths * points);
  for (std::size_t i = 0; i < points; ++i) {
    for (std::size_t p = 0; p < n_paths; ++p) values[p * points + i] = get<double>(in);
  }
  return {std::move(grid), n_paths, seed, std::move(model), std::move(values)};
}

void PathEnsemble::write_csv(const std::filesystem::path& file) const {
  std::ofstream out(file);
  if (!out) throw ValidationError("cannot open " + file.string() + " for writing");
  out << "t";
  for (std::size_t p = 0; p < n_paths_; ++p) out << ",x" << p;
  out << '\n';
  for (std::size_t i = 0; i < points(); ++i) {
    out << fmt::format("{:.17g}", grid_.time(i));
    for (std::size_t p = 0; p < n_paths_; ++p) out << fmt::format(",{:.17g}", value(p, i));
    out << '\n';
  }
}

}  // namespace oddvar
