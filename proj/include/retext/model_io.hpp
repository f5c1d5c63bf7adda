#pragma once

#include <string>

#include "retext/net.hpp"

namespace retext {

// Textual model format, version line "RETEXT-MODEL 1", sections vocab /
// spec / conv / tv <i> / top with explicit row and column counts. Floats are
// written with 17 significant digits so load(save(m)) reproduces the model
// bit for bit. Tv-embedding artifacts use the same format with an empty top
// section.

std::string serialize_model(const Model& model);
Model deserialize_model(const std::string& text, const std::string& origin);

void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

// An embedding artifact is a model file whose top section is empty and that
// carries no attached embeddings of its own.
void save_tv_embedding(const TvEmbedding& emb, const std::string& path);
TvEmbedding load_tv_embedding(const std::string& path);

}  // namespace retext
