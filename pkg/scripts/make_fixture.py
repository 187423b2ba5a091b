#!/usr/bin/env python3
"""Regenerate the bundled synthetic test collection.

Fully deterministic: the collection is written out verbatim from the tables
below. Run from the repository root:

    python scripts/make_fixture.py
"""
from __future__ import annotations

import json
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "src" / "searchsim" / "fixture_data"

# (topic_id, title, description, narrative)
TOPICS = [
    (
        "801",
        "urban beekeeping regulations",
        "City councils are adopting new rules for keeping honey bee hives on "
        "rooftops and in residential backyards.",
        "Useful articles discuss permits, hive limits, inspections, or neighbor "
        "disputes over urban apiaries. Articles about rural honey production "
        "with no regulatory angle are not useful.",
    ),
    (
        "802",
        "offshore wind farm permits",
        "Developers are seeking government approval to build offshore wind "
        "turbine projects along the coast.",
        "Useful articles cover permit applications, environmental reviews, "
        "lease auctions, or legal challenges to offshore wind farm projects. "
        "Articles about onshore solar power are not useful.",
    ),
    (
        "803",
        "school lunch nutrition standards",
        "Districts are changing cafeteria menus to meet new nutrition "
        "standards for school lunch programs.",
        "Useful articles describe sodium or sugar limits, fresh produce "
        "requirements, funding for cafeteria upgrades, or compliance audits. "
        "Articles about restaurant dining trends are not useful.",
    ),
]

# (doc_suffix, grade or None for unjudged, headline, body). Bodies are single
# lines so snippet slices match cleanly in tests.
TOPIC_DOCS: dict[str, list[tuple[str, int | None, str, str]]] = {
    "801": [
        ("001", 2, "Council approves rooftop beekeeping permits",
         "The city council voted on Tuesday to approve a new permit system for urban "
         "beekeeping, allowing residents to register up to four honey bee hives on "
         "rooftops after an inspection by the health department."),
        ("002", 2, "Beekeeping rules set hive limits in backyards",
         "Under the new urban beekeeping regulations, backyard apiaries must keep hives "
         "at least ten feet from property lines, and beekeepers must renew their permit "
         "every two years with the municipal licensing office."),
        ("003", 1, "Neighbors clash over backyard bee hives",
         "A dispute between neighbors over backyard bee hives has pushed the planning "
         "board to consider urban beekeeping rules, including hive registration and a "
         "cap on colonies per residential lot."),
        ("004", 1, "City drafts apiary inspection checklist",
         "Inspectors released a draft checklist for urban apiary visits, covering hive "
         "spacing, water sources for bees, and swarm management plans required by the "
         "proposed beekeeping ordinance."),
        ("005", 2, "Beekeeping ordinance passes first reading",
         "The beekeeping ordinance passed its first reading with broad support, setting "
         "permit fees for rooftop hives and fines for unregistered urban apiaries within "
         "city limits."),
        ("006", 1, "Permit backlog frustrates city beekeepers",
         "Urban beekeepers say the permit backlog at the licensing office has delayed "
         "hive registrations for months, prompting the council to propose a streamlined "
         "beekeeping application process."),
        ("007", 1, "Schools add observation hives under new rules",
         "Two elementary schools added glass observation hives after the district "
         "cleared them under the city's urban beekeeping regulations, which exempt "
         "educational apiaries from the rooftop permit fee."),
        ("008", 2, "Health board finalizes hive inspection rules",
         "The health board finalized inspection rules for urban bee hives, requiring "
         "annual visits, posted permit numbers, and a registered beekeeper of record "
         "for every rooftop or backyard apiary."),
        ("009", 0, "Honey cake recipes for the county fair",
         "Bakers shared their favorite honey cake recipes ahead of the county fair, "
         "praising local honey for its floral notes and debating whether wildflower or "
         "clover varieties bake better."),
        ("010", 0, "Rural honey harvest hits a record high",
         "A record honey harvest across rural counties kept extraction sheds busy this "
         "fall, with commercial beekeepers trucking hives between orchards and alfalfa "
         "fields far from any city."),
        ("011", None, "Apiary association offers permit workshops",
         "The regional apiary association is offering free workshops that walk new "
         "urban beekeepers through the permit paperwork, hive placement rules, and "
         "inspection scheduling introduced by the city."),
        ("012", None, "Op-ed: sensible beekeeping rules protect everyone",
         "A sensible urban beekeeping ordinance protects neighbors, pollinators, and "
         "beekeepers alike, argues a local apiarist, as long as permits stay affordable "
         "and the hive limits reflect lot sizes."),
    ],
    "802": [
        ("001", 2, "Regulators approve offshore wind farm permit",
         "Federal regulators approved the permit for a 62-turbine offshore wind farm, "
         "ending a three-year environmental review of the coastal lease area and its "
         "effects on fisheries and shipping lanes."),
        ("002", 2, "Wind developer files permit application",
         "The offshore wind developer filed its construction permit application on "
         "Monday, proposing turbines twelve miles off the coast and an undersea cable "
         "landing near the harbor substation."),
        ("003", 1, "Lease auction draws offshore wind bidders",
         "A federal lease auction for offshore wind development drew record bids, with "
         "winners now facing permit reviews, seabed surveys, and agreements with "
         "fishing fleets before any turbine rises."),
        ("004", 1, "Fishing groups challenge turbine permits",
         "Fishing industry groups filed a legal challenge against the offshore wind "
         "permits, arguing the environmental review understated impacts on scallop "
         "grounds and seasonal trawling routes."),
        ("005", 2, "Environmental review clears coastal wind project",
         "The final environmental review cleared the coastal wind project, moving the "
         "offshore permit to a public comment period and setting conditions for pile "
         "driving during whale migration season."),
        ("006", 1, "Port upgrades ahead of turbine staging",
         "The port authority approved upgrades to the staging terminal where offshore "
         "wind turbine blades will be assembled once the project's permits clear the "
         "remaining federal and state reviews."),
        ("007", 1, "State fast-tracks offshore wind permitting office",
         "The state opened a dedicated permitting office to coordinate offshore wind "
         "applications, aiming to cut approval times for turbine projects while keeping "
         "environmental safeguards in place."),
        ("008", 2, "Appeals court upholds wind farm approval",
         "An appeals court upheld the permit approval for the offshore wind farm, "
         "ruling that regulators properly weighed the turbine project's effects on "
         "navigation, birds, and the coastal viewshed."),
        ("009", 0, "Rooftop solar rebates expand statewide",
         "A statewide rebate program for rooftop solar panels expanded this week, "
         "offering homeowners incentives that officials say will double residential "
         "solar capacity within five years."),
        ("010", 0, "Wind knocks out power in mountain towns",
         "High wind gusts knocked out power to several mountain towns overnight, and "
         "utility crews spent the morning clearing fallen branches from distribution "
         "lines before restoring service."),
        ("011", None, "Explainer: how offshore wind permits work",
         "This explainer walks through how an offshore wind permit moves from lease "
         "auction to environmental review to construction approval, and where public "
         "comments can still shape a turbine project."),
        ("012", None, "Union touts jobs from offshore wind build-out",
         "A trades union projected thousands of jobs from the offshore wind build-out, "
         "urging regulators to finish the remaining turbine permits so fabrication "
         "yards can begin hiring."),
    ],
    "803": [
        ("001", 2, "District menus meet new school lunch standards",
         "The school district rolled out cafeteria menus that meet the new lunch "
         "nutrition standards, cutting sodium by a quarter, adding whole grains, and "
         "putting fresh fruit on every tray."),
        ("002", 2, "Nutrition audit finds cafeterias compliant",
         "A state nutrition audit found nearly all school cafeterias compliant with the "
         "lunch standards, crediting menu software that tracks sugar, sodium, and "
         "vegetable servings across the week."),
        ("003", 1, "Grant funds cafeteria kitchen upgrades",
         "A federal grant will fund kitchen upgrades at twelve schools so cafeteria "
         "staff can cook lunches from scratch and meet the nutrition standards without "
         "relying on packaged entrees."),
        ("004", 1, "Students taste-test healthier lunch recipes",
         "Students taste-tested healthier lunch recipes as the district tunes its menus "
         "to the nutrition standards, with roasted vegetable tacos and low-sodium chili "
         "topping the ballot."),
        ("005", 2, "Board adopts stricter sugar limits for lunches",
         "The school board adopted stricter sugar limits for lunches and breakfasts, "
         "phasing flavored milk out of elementary cafeterias to stay ahead of the "
         "federal nutrition standards."),
        ("006", 1, "Farm-to-school program supplies fresh produce",
         "A farm-to-school program now supplies the district's cafeterias with fresh "
         "produce twice a week, helping lunch menus meet the vegetable requirements in "
         "the nutrition standards."),
        ("007", 1, "Cafeteria workers train on new menu rules",
         "Cafeteria workers completed training on the new menu rules, learning portion "
         "guides and sodium targets that the school lunch nutrition standards phase in "
         "over the next two years."),
        ("008", 2, "Waiver denied; lunch sodium rules stand",
         "State officials denied the district's waiver request, ruling that the school "
         "lunch sodium limits stand and that cafeterias must meet the nutrition "
         "standards by the spring audit."),
        ("009", 0, "Restaurant week menus celebrate comfort food",
         "Restaurant week menus around downtown celebrate comfort food this year, with "
         "chefs plating braised short ribs and butterscotch desserts for crowds of "
         "weekend diners."),
        ("010", 0, "Bake sale raises funds for band trip",
         "The high school band's bake sale raised enough money for its spring trip, "
         "selling brownies and lemon bars outside the gym during Friday's basketball "
         "game."),
        ("011", None, "Parents ask for clearer lunch menu labels",
         "A parent group asked the district to print clearer nutrition labels on lunch "
         "menus, saying families want to see how each cafeteria meal measures against "
         "the school nutrition standards."),
        ("012", None, "Column: lunch standards are worth the cost",
         "The new school lunch nutrition standards are worth the cost, a columnist "
         "argues, because healthier cafeteria meals pay off in attendance, attention "
         "spans, and lifelong eating habits."),
    ],
}

FILLER_DOCS = [
    ("F001", "Transit agency tests weekend ferry route",
     "The transit agency began testing a weekend ferry route across the bay, hoping to "
     "ease bridge traffic while engineers finish repairs on the eastbound span."),
    ("F002", "Museum reopens after two-year renovation",
     "The natural history museum reopened after a two-year renovation, unveiling a "
     "restored whale skeleton and an interactive hall about regional geology."),
    ("F003", "Marathon reroutes around harbor construction",
     "Organizers rerouted the city marathon around harbor construction, adding a loop "
     "through the old mill district and an extra water station at mile nineteen."),
    ("F004", "Library launches seed lending program",
     "The public library launched a seed lending program, letting gardeners borrow "
     "vegetable and flower seeds each spring and return saved seeds in the fall."),
    ("F005", "Drought rules limit lawn watering hours",
     "New drought rules limit lawn watering to early morning hours twice a week, with "
     "fines for violations and rebates for replacing turf with native plants."),
    ("F006", "Stadium concerts boost downtown hotels",
     "A run of stadium concerts filled downtown hotels to capacity, and restaurants "
     "reported their busiest month since the convention center expansion opened."),
    ("F007", "Bridge repainting project enters final phase",
     "The bridge repainting project entered its final phase, with crews working at "
     "night to sandblast the north tower while traffic shifts to the outer lanes."),
    ("F008", "Community college adds welding certificate",
     "The community college added a welding certificate program after local "
     "manufacturers reported hundreds of openings they could not fill."),
    ("F009", "Farmers market extends season into winter",
     "The farmers market will extend its season into winter, moving vendors inside "
     "the armory hall and adding monthly craft fairs through February."),
    ("F010", "Storm drain cleanup ahead of rainy season",
     "Public works crews began the annual storm drain cleanup ahead of the rainy "
     "season, clearing leaves and debris from four hundred catch basins."),
    ("F011", "Airport unveils expanded security checkpoint",
     "The airport unveiled an expanded security checkpoint with automated bin returns, "
     "cutting average wait times by six minutes during the morning rush."),
    ("F012", "Youth soccer league adds evening matches",
     "The youth soccer league added evening matches under new field lights, easing a "
     "weekend scheduling crunch that had teams playing before sunrise."),
    ("F013", "Historic theater restores neon marquee",
     "Volunteers restored the historic theater's neon marquee, relighting a downtown "
     "landmark that had been dark since the hailstorm four years ago."),
    ("F014", "City hall switches to electric fleet vans",
     "City hall switched its maintenance fleet to electric vans, installing chargers "
     "in the municipal garage and auctioning the old diesel vehicles."),
    ("F015", "Riverfront trail extension opens to cyclists",
     "The riverfront trail extension opened to cyclists and joggers, linking two "
     "parks with a boardwalk that floats above the wetland preserve."),
    ("F016", "Chess club wins regional championship",
     "The high school chess club won the regional championship on tiebreaks, earning "
     "a spot at the state tournament for the first time in a decade."),
    ("F017", "Food bank expands weekend backpack program",
     "The food bank expanded its weekend backpack program to six more schools, packing "
     "shelf-stable meals for students who rely on weekday cafeteria food."),
    ("F018", "Vintage car rally returns to fairgrounds",
     "The vintage car rally returned to the fairgrounds with three hundred entries, "
     "from brass-era tourers to muscle cars restored in local garages."),
    ("F019", "Observatory hosts meteor shower viewing",
     "The observatory will host a public viewing for the meteor shower, setting up "
     "telescopes on the lawn and running shuttle buses from the campus lot."),
    ("F020", "Bakery wins national sourdough award",
     "A neighborhood bakery won a national sourdough award, crediting its century-old "
     "starter and the cool coastal air that slows each loaf's final rise."),
    ("F021", "Tile mural honors shipyard workers",
     "Artists unveiled a tile mural honoring shipyard workers, piecing together "
     "portraits from photographs that families loaned to the historical society."),
    ("F022", "Night market pilots reusable dishware",
     "The night market piloted reusable dishware this summer, cutting trash volume in "
     "half and adding wash stations staffed by volunteers."),
    ("F023", "Kayak rentals open on restored creek",
     "Kayak rentals opened on the restored creek, where removed culverts and replanted "
     "banks brought herons and river otters back within two seasons."),
    ("F024", "Orchestra tours elementary schools",
     "The symphony orchestra began its annual tour of elementary schools, packing "
     "gymnasiums for a program that lets students try the instruments afterward."),
]


def trectext(doc_id: str, headline: str, body: str) -> str:
    return (f"<DOC>\n<DOCNO> {doc_id} </DOCNO>\n"
            f"<HEADLINE>{headline}</HEADLINE>\n"
            f"<TEXT>\n{body}\n</TEXT>\n</DOC>\n")


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)

    corpus_parts: list[str] = []
    qrels_lines: list[str] = []
    for topic_id, docs in sorted(TOPIC_DOCS.items()):
        for suffix, grade, headline, body in docs:
            doc_id = f"FIX-{topic_id}-{suffix}"
            corpus_parts.append(trectext(doc_id, headline, body))
            if grade is not None:
                qrels_lines.append(f"{topic_id} 0 {doc_id} {grade}")
    for suffix, headline, body in FILLER_DOCS:
        corpus_parts.append(trectext(f"FIX-900-{suffix}", headline, body))
    (OUT / "corpus.trectext").write_text("".join(corpus_parts), encoding="utf-8")
    (OUT / "qrels.txt").write_text("\n".join(qrels_lines) + "\n", encoding="utf-8")

    topic_blocks = []
    for topic_id, title, desc, narr in TOPICS:
        topic_blocks.append(
            f"<top>\n<num> Number: {topic_id}\n<title> {title}\n\n"
            f"<desc> Description:\n{desc}\n\n<narr> Narrative:\n{narr}\n</top>\n"
        )
    (OUT / "topics.txt").write_text("\n".join(topic_blocks), encoding="utf-8")

    campaign = {
        "collection": {
            "name": "fixture",
            "corpus": "corpus.trectext",
            "format": "trectext",
            "field_map": None,
            "topics": "topics.txt",
            "qrels": "qrels.txt",
        },
        "index": {"stopwords": False, "stem": False, "k1": 1.2, "b": 0.75},
        "users": ["RND", "RND_STAR", "TTT", "FTTC", "PRF", "NRF", "CRF", "CRF_PRIME"],
        "session": {
            "max_queries": 5,
            "page_size": 5,
            "max_pages_per_query": 1,
            "stop_rule": {"kind": "fixed_depth", "value": 5},
            "queries_per_session": 5,
            "snippet_max_chars": 160,
            "p_random": 0.5,
        },
        "costs": {"query": 10.0, "snippet": 3.0, "document": 20.0, "judgment": 5.0},
        "llm": {"backend": "scripted", "reply_table": None},
        "campaign_seed": 0,
        "anomaly_threshold": 0,
        "output_dir": "out",
    }
    (OUT / "campaign.json").write_text(
        json.dumps(campaign, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    replies = [
        "# Example reply table: key<TAB>value, matched as prompt substrings.",
        "EXAMPLE_MARKER\tThis reply is returned whenever a prompt contains the marker.",
    ]
    (OUT / "replies.tsv").write_text("\n".join(replies) + "\n", encoding="utf-8")
    print(f"wrote fixture collection to {OUT}")


if __name__ == "__main__":
    main()
