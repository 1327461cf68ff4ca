#pragma once

#include "semaquery/sql/ast.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace semaquery {

//! Catalog record for a registered model.
struct ModelEntry {
	std::string name;
	ModelType type = ModelType::Llm;
	std::string path;
	bool on_prompt = false;
	std::optional<std::string> base_api;
	//! Name of the secret holding the API key; never the key itself.
	std::optional<std::string> secret;
	//! Bound relation (ON TABLE).
	std::optional<std::string> relation;
	std::vector<std::string> input_set;
	std::vector<ColumnDefinition> output_set;
	OptionMap options;

	static ModelEntry FromStatement(const CreateModelStatement &stmt);

	//! One catalog line. Field order: version, name, type, path, on_prompt, base_api, secret, relation,
	//! input_set, output_set, options. Absent optionals are written as null.
	std::string Serialize() const;
	//! Throws CatalogException on malformed records.
	static ModelEntry Deserialize(const std::string &line);

	bool operator==(const ModelEntry &) const = default;
};

//! Registry of models. Single writer, many readers; lookups return immutable snapshots.
//! When constructed with a directory the catalog is persisted to `<dir>/models.jsonl` after every change.
class ModelCatalog {
public:
	ModelCatalog() = default;
	//! Loads `<dir>/models.jsonl` when present.
	explicit ModelCatalog(std::filesystem::path directory);

	//! Throws CatalogException when the name is taken.
	std::shared_ptr<const ModelEntry> Create(ModelEntry entry);
	//! Throws CatalogException "model not found: X".
	std::shared_ptr<const ModelEntry> Lookup(const std::string &name) const;
	std::shared_ptr<const ModelEntry> TryLookup(const std::string &name) const;
	//! Throws CatalogException when missing unless if_exists.
	void Drop(const std::string &name, bool if_exists = false);
	//! Sorted by name.
	std::vector<std::shared_ptr<const ModelEntry>> List() const;

	void Save(const std::filesystem::path &file) const;
	//! Throws CatalogException naming the line and byte offset of a corrupt record.
	static std::vector<ModelEntry> LoadEntries(const std::filesystem::path &file);

	const std::optional<std::filesystem::path> &Directory() const {
		return directory_;
	}

private:
	void PersistLocked() const;

	mutable std::shared_mutex mutex_;
	std::map<std::string, std::shared_ptr<const ModelEntry>> entries_;
	std::optional<std::filesystem::path> directory_;
};

//! API keys by name. Sources in order: the secrets file (JSON object, owner read/write only), then the
//! environment variable SEMAQUERY_SECRET_<NAME> with NAME upper-cased and non-alphanumerics mapped to '_'.
class SecretStore {
public:
	SecretStore() = default;
	explicit SecretStore(std::filesystem::path file);

	std::optional<std::string> Get(const std::string &name) const;
	bool Exists(const std::string &name) const {
		return Get(name).has_value();
	}
	//! Stores the secret and rewrites the file with mode 0600.
	void Put(const std::string &name, const std::string &value);

	static std::string EnvironmentVariable(const std::string &name);

private:
	void LoadLocked() const;

	mutable std::mutex mutex_;
	std::optional<std::filesystem::path> file_;
	mutable bool loaded_ = false;
	mutable std::map<std::string, std::string> values_;
};

} // namespace semaquery
