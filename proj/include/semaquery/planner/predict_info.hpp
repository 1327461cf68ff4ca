#pragma once

#include "semaquery/catalog/model_catalog.hpp"
#include "semaquery/planner/bound_expression.hpp"
#include "semaquery/sql/prompt_template.hpp"

#include <memory>
#include <string>
#include <vector>

namespace semaquery {

enum class PredictMode : uint8_t { TableInference, TableGeneration, Scalar, Aggregate };

const char *PredictModeName(PredictMode mode);

//! A resolved prompt input: the JSON key sent to the model and the column feeding it.
struct PredictInput {
	std::string key;
	ColumnId column = 0;
	LogicalType type = LogicalType::Varchar;
	std::string display;

	bool operator==(const PredictInput &) const = default;
};

//! Everything the predict operator needs, produced by the binder.
struct PredictInfo {
	std::shared_ptr<const ModelEntry> model;
	//! Empty for tabular models.
	PromptTemplate prompt;
	std::vector<PredictInput> inputs;
	//! Predicted columns, origin = Predicted.
	std::vector<ColumnBinding> outputs;
	PredictMode mode = PredictMode::Scalar;
	//! Per-clause OPTIONS (selectivity, quality, ...).
	OptionMap hints;
	//! The output was synthesized because the prompt declared none (Boolean join/filter prompts).
	bool implicit_output = false;

	const std::string &ModelName() const {
		return model->name;
	}
	bool IsTabular() const {
		return model->type == ModelType::Tabular;
	}
	//! Clause hint, then model option, then 0.5.
	double Selectivity() const;
	//! Clause hint, then model option, then 1.0.
	double Quality() const;
	std::set<ColumnId> InputColumns() const;
	bool Produces(ColumnId id) const;

	//! EXPLAIN text: mode, model, inputs, outputs, prompt. Never includes secret values.
	std::string Describe() const;
};

} // namespace semaquery
