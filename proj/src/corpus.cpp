#include "flightlab/corpus.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "flightlab/error.hpp"
#include "flightlab/sim.hpp"
#include "flightlab/summary.hpp"
#include "flightlab/tsv.hpp"

namespace flightlab {

std::vector<CorpusFile> load_corpus(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(Errc::CorpusNotFound, "no corpus directory at " + dir.string());

  std::map<std::string, bool> manifest_truth;
  if (fs::exists(dir / "manifest.json")) {
    for (const auto& e : load_manifest(dir / "manifest.json").entries) {
      manifest_truth[e.sortie_id] = e.truth_good;
    }
  }
  std::vector<fs::path> files;
  for (const auto& de : fs::recursive_directory_iterator(dir)) {
    if (de.is_regular_file() && de.path().extension() == ".tsv") files.push_back(de.path());
  }
  if (files.empty()) throw Error(Errc::CorpusNotFound, "no .tsv files under " + dir.string());

  std::vector<CorpusFile> out;
  std::set<std::string> seen;
  for (const auto& f : files) {
    Trajectory t = load_tsv(f);
    if (!seen.insert(t.sortie_id()).second) {
      throw Error(Errc::InvalidArgument, "duplicate sortie id " + t.sortie_id());
    }
    std::optional<bool> truth;
    if (auto it = manifest_truth.find(t.sortie_id()); it != manifest_truth.end()) {
      truth = it->second;
    } else {
      const auto parent = f.parent_path().filename().string();
      if (parent == "good") truth = true;
      if (parent == "bad") truth = false;
    }
    out.push_back({std::move(t), truth});
  }
  std::sort(out.begin(), out.end(), [](const CorpusFile& a, const CorpusFile& b) {
    return a.trajectory.sortie_id() < b.trajectory.sortie_id();
  });
  return out;
}

Dataset quality_dataset(std::span<const CorpusFile> corpus) {
  std::vector<double> x;
  std::vector<int> y;
  std::vector<std::string> ids;
  x.reserve(corpus.size() * SummaryFeatures::kVectorSize);
  for (const auto& c : corpus) {
    if (!c.truth_good) {
      throw Error(Errc::InvalidArgument, "no truth label for " + c.trajectory.sortie_id());
    }
    const auto v = compute_summary(c.trajectory).as_vector();
    x.insert(x.end(), v.begin(), v.end());
    y.push_back(*c.truth_good ? 1 : 0);
    ids.push_back(c.trajectory.sortie_id());
  }
  Dataset d(std::move(x), SummaryFeatures::kVectorSize, std::move(y), {"bad", "good"});
  d.row_ids = std::move(ids);
  d.feature_names = SummaryFeatures::names();
  return d;
}

}  // namespace flightlab
