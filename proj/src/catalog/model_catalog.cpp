#include "semaquery/catalog/model_catalog.hpp"

#include "semaquery/common/string_util.hpp"

#include "json.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

namespace semaquery {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kCatalogVersion = 1;

std::string Key(const std::string &name) {
	return string_util::Lower(name);
}

ordered_json OptionToJson(const OptionValue &value) {
	return std::visit([](const auto &v) { return ordered_json(v); }, value);
}

OptionValue OptionFromJson(const ordered_json &value) {
	if (value.is_boolean()) {
		return OptionValue(value.get<bool>());
	}
	if (value.is_number_integer()) {
		return OptionValue(value.get<int64_t>());
	}
	if (value.is_number_float()) {
		return OptionValue(value.get<double>());
	}
	if (value.is_string()) {
		return OptionValue(value.get<std::string>());
	}
	throw CatalogException("unsupported option value " + value.dump());
}

ordered_json OptionalString(const std::optional<std::string> &value) {
	return value ? ordered_json(*value) : ordered_json(nullptr);
}

std::optional<std::string> ReadOptionalString(const ordered_json &record, const char *field) {
	auto it = record.find(field);
	if (it == record.end() || it->is_null()) {
		return std::nullopt;
	}
	return it->get<std::string>();
}

ModelType ModelTypeFromName(const std::string &name) {
	auto upper = string_util::Upper(name);
	if (upper == "LLM") {
		return ModelType::Llm;
	}
	if (upper == "TABULAR") {
		return ModelType::Tabular;
	}
	if (upper == "EMBED") {
		return ModelType::Embed;
	}
	throw CatalogException("unknown model type '" + name + "'");
}

//! Writes to a sibling temp file and renames, so readers never see a half-written catalog.
void WriteCatalogFile(const std::map<std::string, std::shared_ptr<const ModelEntry>> &entries,
                      const std::filesystem::path &file) {
	auto temp = file;
	temp += ".tmp";
	{
		std::ofstream out(temp, std::ios::binary | std::ios::trunc);
		if (!out) {
			throw IOException("cannot write catalog file: " + temp.string());
		}
		for (auto &[key, entry] : entries) {
			out << entry->Serialize() << "\n";
		}
	}
	std::filesystem::rename(temp, file);
}

} // namespace

ModelEntry ModelEntry::FromStatement(const CreateModelStatement &stmt) {
	ModelEntry entry;
	entry.name = stmt.name;
	entry.type = stmt.type;
	entry.path = stmt.path;
	entry.on_prompt = stmt.on_prompt;
	entry.base_api = stmt.api;
	entry.secret = stmt.secret;
	entry.relation = stmt.table;
	entry.input_set = stmt.features;
	entry.output_set = stmt.outputs;
	entry.options = stmt.options;
	return entry;
}

std::string ModelEntry::Serialize() const {
	ordered_json record;
	record["version"] = kCatalogVersion;
	record["name"] = name;
	record["type"] = ModelTypeName(type);
	record["path"] = path;
	record["on_prompt"] = on_prompt;
	record["base_api"] = OptionalString(base_api);
	record["secret"] = OptionalString(secret);
	record["relation"] = OptionalString(relation);
	record["input_set"] = input_set;
	auto outputs = ordered_json::array();
	for (auto &column : output_set) {
		outputs.push_back(ordered_json {{"name", column.name}, {"type", TypeName(column.type)}});
	}
	record["output_set"] = std::move(outputs);
	auto option_object = ordered_json::object();
	for (auto &[key, value] : options) {
		option_object[key] = OptionToJson(value);
	}
	record["options"] = std::move(option_object);
	return record.dump();
}

ModelEntry ModelEntry::Deserialize(const std::string &line) {
	ordered_json record;
	try {
		record = ordered_json::parse(line);
	} catch (nlohmann::json::parse_error &ex) {
		throw CatalogException("malformed catalog record at byte " + std::to_string(ex.byte) + ": " + ex.what());
	}
	try {
		if (!record.is_object()) {
			throw CatalogException("catalog record is not an object");
		}
		auto version = record.value("version", 0);
		if (version != kCatalogVersion) {
			throw CatalogException("unsupported catalog record version " + std::to_string(version));
		}
		ModelEntry entry;
		entry.name = record.at("name").get<std::string>();
		entry.type = ModelTypeFromName(record.at("type").get<std::string>());
		entry.path = record.at("path").get<std::string>();
		entry.on_prompt = record.at("on_prompt").get<bool>();
		entry.base_api = ReadOptionalString(record, "base_api");
		entry.secret = ReadOptionalString(record, "secret");
		entry.relation = ReadOptionalString(record, "relation");
		entry.input_set = record.at("input_set").get<std::vector<std::string>>();
		for (auto &column : record.at("output_set")) {
			auto type_name = column.at("type").get<std::string>();
			auto type = TypeFromName(type_name);
			if (!type) {
				throw CatalogException("unknown output type '" + type_name + "'");
			}
			entry.output_set.push_back(ColumnDefinition {column.at("name").get<std::string>(), *type});
		}
		for (auto &[key, value] : record.at("options").items()) {
			entry.options.Set(key, OptionFromJson(value));
		}
		return entry;
	} catch (nlohmann::json::exception &ex) {
		throw CatalogException(std::string("malformed catalog record: ") + ex.what());
	}
}

ModelCatalog::ModelCatalog(std::filesystem::path directory) : directory_(std::move(directory)) {
	auto file = *directory_ / "models.jsonl";
	if (std::filesystem::exists(file)) {
		for (auto &entry : LoadEntries(file)) {
			auto key = Key(entry.name);
			entries_[key] = std::make_shared<const ModelEntry>(std::move(entry));
		}
	}
}

std::shared_ptr<const ModelEntry> ModelCatalog::Create(ModelEntry entry) {
	std::unique_lock lock(mutex_);
	auto key = Key(entry.name);
	if (entries_.count(key)) {
		throw CatalogException("model already exists: " + entry.name);
	}
	auto snapshot = std::make_shared<const ModelEntry>(std::move(entry));
	entries_[key] = snapshot;
	PersistLocked();
	return snapshot;
}

std::shared_ptr<const ModelEntry> ModelCatalog::Lookup(const std::string &name) const {
	auto entry = TryLookup(name);
	if (!entry) {
		throw CatalogException("model not found: " + name);
	}
	return entry;
}

std::shared_ptr<const ModelEntry> ModelCatalog::TryLookup(const std::string &name) const {
	std::shared_lock lock(mutex_);
	auto it = entries_.find(Key(name));
	return it == entries_.end() ? nullptr : it->second;
}

void ModelCatalog::Drop(const std::string &name, bool if_exists) {
	std::unique_lock lock(mutex_);
	if (entries_.erase(Key(name)) == 0) {
		if (if_exists) {
			return;
		}
		throw CatalogException("model not found: " + name);
	}
	PersistLocked();
}

std::vector<std::shared_ptr<const ModelEntry>> ModelCatalog::List() const {
	std::shared_lock lock(mutex_);
	std::vector<std::shared_ptr<const ModelEntry>> result;
	for (auto &[key, entry] : entries_) {
		result.push_back(entry);
	}
	return result;
}

void ModelCatalog::Save(const std::filesystem::path &file) const {
	std::shared_lock lock(mutex_);
	WriteCatalogFile(entries_, file);
}

void ModelCatalog::PersistLocked() const {
	if (!directory_) {
		return;
	}
	std::filesystem::create_directories(*directory_);
	WriteCatalogFile(entries_, *directory_ / "models.jsonl");
}

std::vector<ModelEntry> ModelCatalog::LoadEntries(const std::filesystem::path &file) {
	std::ifstream in(file, std::ios::binary);
	if (!in) {
		throw IOException("cannot open catalog file: " + file.string());
	}
	std::vector<ModelEntry> result;
	std::string line;
	size_t line_number = 0;
	size_t offset = 0;
	while (std::getline(in, line)) {
		line_number++;
		size_t line_offset = offset;
		offset += line.size() + 1;
		if (string_util::Trim(line).empty()) {
			continue;
		}
		try {
			result.push_back(ModelEntry::Deserialize(line));
		} catch (CatalogException &ex) {
			throw CatalogException("corrupt catalog file " + file.string() + " at line " +
			                       std::to_string(line_number) + " (offset " + std::to_string(line_offset) +
			                       "): " + ex.RawMessage());
		}
	}
	return result;
}

SecretStore::SecretStore(std::filesystem::path file) : file_(std::move(file)) {
}

std::string SecretStore::EnvironmentVariable(const std::string &name) {
	std::string result = "SEMAQUERY_SECRET_";
	for (char c : name) {
		result += std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::toupper(c)) : '_';
	}
	return result;
}

void SecretStore::LoadLocked() const {
	if (loaded_) {
		return;
	}
	loaded_ = true;
	if (!file_ || !std::filesystem::exists(*file_)) {
		return;
	}
	using std::filesystem::perms;
	auto mode = std::filesystem::status(*file_).permissions();
	if ((mode & (perms::group_all | perms::others_all)) != perms::none) {
		throw ConfigException("secrets file " + file_->string() +
		                      " is accessible by group or others; restrict it with chmod 600");
	}
	std::ifstream in(*file_, std::ios::binary);
	std::stringstream buffer;
	buffer << in.rdbuf();
	nlohmann::json document;
	try {
		document = nlohmann::json::parse(buffer.str());
	} catch (nlohmann::json::parse_error &ex) {
		// the file content is never echoed; it holds keys
		throw CatalogException("secrets file is not valid JSON (byte " + std::to_string(ex.byte) + ")");
	}
	if (!document.is_object()) {
		throw CatalogException("secrets file must contain a JSON object");
	}
	for (auto &[key, value] : document.items()) {
		if (value.is_string()) {
			values_[Key(key)] = value.get<std::string>();
		}
	}
}

std::optional<std::string> SecretStore::Get(const std::string &name) const {
	{
		std::lock_guard lock(mutex_);
		LoadLocked();
		auto it = values_.find(Key(name));
		if (it != values_.end()) {
			return it->second;
		}
	}
	if (const char *env = std::getenv(EnvironmentVariable(name).c_str())) {
		return std::string(env);
	}
	return std::nullopt;
}

void SecretStore::Put(const std::string &name, const std::string &value) {
	std::lock_guard lock(mutex_);
	LoadLocked();
	values_[Key(name)] = value;
	if (!file_) {
		return;
	}
	if (file_->has_parent_path()) {
		std::filesystem::create_directories(file_->parent_path());
	}
	nlohmann::json document = nlohmann::json::object();
	for (auto &[key, secret] : values_) {
		document[key] = secret;
	}
	// Created 0600 before any key is written, so the file is never readable by others.
	int fd = ::open(file_->c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0600);
	if (fd < 0) {
		throw IOException("cannot write secrets file: " + file_->string());
	}
	::fchmod(fd, 0600);
	auto text = document.dump() + "\n";
	auto written = ::write(fd, text.data(), text.size());
	::close(fd);
	if (written != static_cast<ssize_t>(text.size())) {
		throw IOException("cannot write secrets file: " + file_->string());
	}
}

} // namespace semaquery
