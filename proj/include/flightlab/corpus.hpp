#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "flightlab/classifier.hpp"
#include "flightlab/trajectory.hpp"

namespace flightlab {

struct CorpusFile {
  Trajectory trajectory;
  std::optional<bool> truth_good;
};

/// Every .tsv below dir, sorted by sortie id (the file stem). Truth comes
/// from dir/manifest.json when present, else from a good/ or bad/ parent
/// folder. Throws CorpusNotFound.
std::vector<CorpusFile> load_corpus(const std::filesystem::path& dir);

/// Summary-feature dataset with classes {"bad", "good"}; rows without truth
/// are rejected (InvalidArgument).
Dataset quality_dataset(std::span<const CorpusFile> corpus);

}  // namespace flightlab
