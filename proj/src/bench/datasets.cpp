#include "semaquery/bench/datasets.hpp"

#include "semaquery/common/exception.hpp"

#include <algorithm>
#include <array>
#include <random>

namespace semaquery {

namespace {

constexpr std::array<const char *, 5> kTones {"awful", "great", "boring", "moving", "fine"};

} // namespace

void CreateReviewDataset(TableCatalog &tables, const ReviewDatasetSpec &spec) {
	if (spec.movies < 2 || spec.target_reviews > spec.reviews) {
		throw ConfigException("review dataset needs at least two movies and target_reviews <= reviews");
	}
	std::mt19937_64 rng(spec.seed);
	auto movie = std::make_shared<Table>(
	    "Movie", std::vector<ColumnSchema> {{"movie_id", LogicalType::Integer},
	                                        {"title", LogicalType::Varchar},
	                                        {"plot", LogicalType::Varchar}});
	// The target movie sits in the middle so neither scan order nor id order favours it.
	auto target_id = static_cast<int64_t>(spec.movies / 2 + 1);
	for (size_t m = 1; m <= spec.movies; m++) {
		auto id = static_cast<int64_t>(m);
		auto title = id == target_id ? spec.target_title : "Movie " + std::to_string(m);
		movie->AppendRow({Value::Integer(id), Value::Varchar(title),
		                  Value::Varchar("plot of " + title + " told over " + std::to_string(90 + m % 60) +
		                                 " minutes")});
	}
	movie->Keys().primary_key = "movie_id";

	std::vector<int64_t> owners(spec.target_reviews, target_id);
	std::uniform_int_distribution<int64_t> other(1, static_cast<int64_t>(spec.movies) - 1);
	while (owners.size() < spec.reviews) {
		auto id = other(rng);
		owners.push_back(id >= target_id ? id + 1 : id);
	}
	std::shuffle(owners.begin(), owners.end(), rng);

	auto review = std::make_shared<Table>(
	    "Review", std::vector<ColumnSchema> {{"review_id", LogicalType::Integer},
	                                         {"movie_id", LogicalType::Integer},
	                                         {"review", LogicalType::Varchar}});
	std::uniform_int_distribution<size_t> tone(0, kTones.size() - 1);
	for (size_t r = 0; r < owners.size(); r++) {
		auto text = "review " + std::to_string(r + 1) + ": " + std::string(kTones[tone(rng)]) + " film";
		review->AppendRow({Value::Integer(static_cast<int64_t>(r + 1)), Value::Integer(owners[r]), Value::Varchar(text)});
	}
	review->Keys().primary_key = "review_id";
	review->Keys().foreign_keys.push_back({"movie_id", "Movie", "movie_id"});

	tables.CreateTable(movie, true);
	tables.CreateTable(review, true);
}

void CreateDuplicateDataset(TableCatalog &tables, const std::string &name, size_t rows, size_t distinct,
                            uint64_t seed) {
	if (distinct == 0 && rows > 0) {
		throw ConfigException("duplicate dataset needs at least one distinct value");
	}
	std::mt19937_64 rng(seed);
	std::vector<size_t> picks;
	for (size_t i = 0; i < rows; i++) {
		picks.push_back(i < distinct ? i : std::uniform_int_distribution<size_t>(0, distinct - 1)(rng));
	}
	std::shuffle(picks.begin(), picks.end(), rng);
	auto table = std::make_shared<Table>(
	    name, std::vector<ColumnSchema> {{"id", LogicalType::Integer}, {"text", LogicalType::Varchar}});
	for (size_t i = 0; i < rows; i++) {
		table->AppendRow({Value::Integer(static_cast<int64_t>(i + 1)), Value::Varchar("text " + std::to_string(picks[i]))});
	}
	tables.CreateTable(table, true);
}

} // namespace semaquery
