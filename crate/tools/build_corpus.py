"""Writes the bundled corpus: requirement specs and stand-in CQ sets.

The spec bodies are best-effort reconstructions of the five scenarios, not
transcriptions of the original documents. The CQ sets are hand-written
stand-ins whose sizes follow the published per-model counts; they are not
model output and their model_id values say so.
"""
import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent / "corpus"
CREATED_AT = "2025-06-01T00:00:00Z"
DECODING = {"temperature": 0.0, "top_p": 1.0, "seed": 46}

SPECS = [
    {
        "spec_id": "musicmeta",
        "kind": "user_story",
        "domain": "music metadata",
        "title": "Music Meta: integrating heterogeneous music datasets",
        "body": (
            "Persona: Elena is a computer scientist who maintains a research platform that links music "
            "collections from libraries, archives and streaming catalogues.\n"
            "Goal: she wants to integrate heterogeneous music metadata so that gaps in one dataset can be "
            "completed with information from another.\n"
            "Story: Elena receives records about musical works, their compositions, recordings and "
            "performances. Each source describes artists, ensembles, composers and performers with different "
            "identifiers and naming conventions. She needs to know which recording realises which composition, "
            "who performed it, with which instruments, where and when the performance took place, and which "
            "release or album contains it. She also wants to track genres, lyrics, arrangements and the licence "
            "under which each record is published, and to keep the provenance of every statement so that "
            "conflicting facts from different sources can be compared."
        ),
    },
    {
        "spec_id": "bme",
        "kind": "user_story",
        "domain": "cultural heritage",
        "title": "British Music Experience: curating a donated collection",
        "body": (
            "Persona 1: Sam is a curator at a museum of popular music. Sam manages objects such as stage "
            "costumes, instruments, posters, tickets and recordings, and plans exhibitions around them.\n"
            "Persona 2: Morgan is a donor who gives a private collection of memorabilia to the museum and wants "
            "the story of each object to be preserved.\n"
            "Story: When an object arrives, Sam records who donated it, when it was acquired, its condition, "
            "its dimensions and materials, and which musician, band or event it is associated with. Sam links "
            "objects to the venues and tours where they were used and to the people who made or wore them. "
            "Morgan wants to see where the donated objects are displayed, whether they are on loan to another "
            "institution, and how their history is told to visitors. Sam also needs to check copyright and "
            "reproduction rights before publishing images online, and to find related objects for new "
            "exhibitions."
        ),
    },
    {
        "spec_id": "wtgw",
        "kind": "use_case",
        "domain": "tourism",
        "title": "When To Go Where: national park recommender",
        "body": (
            "Use case name: Recommend a national park visit.\n"
            "Primary actor: a traveller planning a trip.\n"
            "Supporting actors: park data services, weather services, visitor statistics services.\n"
            "Preconditions: the traveller has stated preferred travel dates, a home location and preferred "
            "activities.\n"
            "Main flow: 1. The traveller enters dates, a starting location, maximum travel distance and "
            "activities of interest such as hiking, camping or wildlife viewing. 2. The system retrieves parks "
            "within the travel distance. 3. The system retrieves the expected weather for each park on the "
            "given dates. 4. The system retrieves expected crowd levels from historical visitor counts. "
            "5. The system ranks parks by weather suitability, crowding and activity match. 6. The system "
            "presents the ranked parks with opening hours, entrance fees and accessibility information.\n"
            "Alternative flow: if no park matches, the system suggests alternative dates with better weather or "
            "fewer visitors.\n"
            "Postconditions: the traveller has a ranked list of parks and dates."
        ),
    },
    {
        "spec_id": "pjo",
        "kind": "use_case",
        "domain": "media analysis",
        "title": "Political Journalism: detecting reporting trends and bias",
        "body": (
            "Use case name: Analyse political coverage across news outlets.\n"
            "Primary actor: a media analyst.\n"
            "Supporting actors: news archives, outlet ownership registries, fact-checking services.\n"
            "Preconditions: articles from several outlets are available with publication metadata.\n"
            "Main flow: 1. The analyst selects a political topic, a time period and a set of outlets. "
            "2. The system collects articles on the topic, with their authors, publication dates and sections. "
            "3. The system identifies politicians, parties and policies mentioned in each article. "
            "4. The system measures the sentiment and framing used for each party and politician. "
            "5. The system compares coverage volume and tone between outlets and over time. "
            "6. The system relates outlets to their owners and declared political leaning and reports "
            "possible bias.\n"
            "Alternative flow: when a claim has been checked by a fact-checking service, the verdict is "
            "attached to the article.\n"
            "Postconditions: the analyst obtains trend and bias reports per outlet."
        ),
    },
    {
        "spec_id": "pdto",
        "kind": "use_case",
        "domain": "healthcare",
        "title": "Personalized Depression Treatment",
        "body": (
            "Use case name: Select a depression treatment for a patient.\n"
            "Primary actor: a clinician.\n"
            "Supporting actors: electronic health records, genetic testing laboratories, clinical trial "
            "registries.\n"
            "Preconditions: the patient has a diagnosis of major depressive disorder and has consented to "
            "genetic testing.\n"
            "Main flow: 1. The clinician retrieves the patient's demographics, history of prior treatments and "
            "comorbidities. 2. The system retrieves the patient's pharmacogenetic test results, including "
            "variants that affect drug metabolism. 3. The system searches clinical trial results for treatments "
            "studied in patients with similar demographics and genotypes. 4. The system estimates response "
            "and side-effect likelihood for each candidate medication or therapy. 5. The clinician reviews the "
            "ranked options with the supporting evidence and selects a treatment plan.\n"
            "Alternative flow: if the evidence is insufficient, the system recommends a referral to a "
            "specialist.\n"
            "Postconditions: the treatment plan and its evidence are recorded in the patient record."
        ),
    },
]

SETS = {
    ("bme", "gemini", "gemini-2.5-pro"): [
        "Who donated this object to the museum?",
        "When was the object acquired by the museum?",
        "What is the current condition of the object?",
        "What materials is the stage costume made of?",
        "What are the dimensions of the poster?",
        "Which musician is associated with this instrument?",
        "Which band wore these costumes on tour?",
        "At which venue was this instrument used?",
        "Which tour is the ticket associated with?",
        "Who made the guitar in the collection?",
        "Which objects were donated by Morgan?",
        "Where is each donated object currently displayed?",
        "Is the object currently on loan to another institution?",
        "Which institution has borrowed the costume?",
        "When does the loan of the object end?",
        "How is the history of the object presented to visitors?",
        "Which exhibitions include objects from the donated collection?",
        "Who holds the copyright for the photograph of the object?",
        "Are we allowed to publish images of this poster online?",
        "What reproduction rights apply to the album artwork?",
        "Which objects are related to the same concert?",
        "What other objects are associated with the same musician?",
        "Which events took place at the venue where the costume was worn?",
        "Who is the curator responsible for the exhibition?",
        "What is the provenance of the tour poster before the donation?",
        "Which recordings in the collection feature the band?",
        "How many objects did the donor give to the museum?",
        "Which objects require conservation treatment?",
        "What story did the donor tell about the object?",
        "In which year was the concert ticket printed?",
        "Which objects from the collection are in storage?",
        "Which exhibition themes could use the donated objects?",
        "Who performed at the event where the ticket was used?",
        "What is the insurance value of the instrument?",
        "Which objects were worn by the lead singer?",
    ],
    ("bme", "gpt", "gpt-4.1"): [
        "Who is the donor of a given object?",
        "What is the acquisition date of an object?",
        "What condition is the object in?",
        "What is the object made of?",
        "Which artist or band is the object associated with?",
        "Which tour was the object used on?",
        "Which venue is connected to the object?",
        "Who created or wore the object?",
        "Where is the object displayed?",
        "Is the object on loan?",
        "To which institution is the object loaned?",
        "Which exhibition features the object?",
        "What narrative accompanies the object in the exhibition?",
        "Who owns the rights to images of the object?",
        "Can an image of the object be published online?",
        "Which objects share an association with the same event?",
        "Which objects were part of the same donation?",
        "What type of object is it?",
        "When was the object used on stage?",
        "What are the physical dimensions of the object?",
        "Which curator catalogued the object?",
        "What previous owners did the object have?",
        "Which objects are candidates for a new exhibition about a band?",
        "What events is the musician associated with?",
        "Where was the event that the object relates to held?",
    ],
    ("musicmeta", "gemini", "gemini-2.5-pro"): [
        "Which recording realises a given composition?",
        "Who composed the musical work?",
        "Who performed the recording?",
        "Which instruments were played in the performance?",
        "Where did the performance take place?",
        "When did the performance take place?",
        "Which album contains the recording?",
        "Which release includes this track?",
        "What is the genre of the musical work?",
        "What are the lyrics of the song?",
        "Who wrote the lyrics of the song?",
        "Which arrangement of the composition was used in the recording?",
        "Who arranged the composition?",
        "Under which licence is the metadata record published?",
        "Which source provided this statement about the artist?",
        "Which sources give conflicting release dates for the album?",
        "What identifiers does each dataset use for the artist?",
        "Which artists in dataset A correspond to artists in dataset B?",
        "Which members belong to the ensemble?",
        "Which works has the composer written?",
        "What role did each performer have in the recording?",
        "Which performances of the work were recorded live?",
        "What is the duration of the recording?",
        "Which record label issued the release?",
        "In which country was the album released?",
        "Which compositions lack a recording in the integrated dataset?",
        "Which missing fields of a record can be completed from another source?",
        "How many recordings exist for each composition?",
        "Which names are used for the same artist across sources?",
        "Which works are derived from another musical work?",
        "What is the provenance of the genre assigned to the recording?",
    ],
    ("wtgw", "gemini", "gemini-2.5-pro"): [
        "Which national parks are within the traveller's maximum travel distance?",
        "What is the expected weather in a park on the given dates?",
        "What is the expected crowd level in a park on the given dates?",
        "Which parks offer hiking?",
        "Which parks allow camping?",
        "Which parks are good for wildlife viewing?",
        "What are the opening hours of a park?",
        "What is the entrance fee of a park?",
        "Which parks are accessible to visitors with reduced mobility?",
        "How far is each park from the traveller's starting location?",
        "Which park best matches the traveller's preferred activities?",
        "How are parks ranked by weather suitability?",
        "Which parks have the fewest visitors in a given month?",
        "What were the historical visitor counts of a park?",
        "Which alternative dates have better weather for a park?",
        "Which alternative dates have fewer visitors for a park?",
        "Which parks are open on the traveller's travel dates?",
        "What activities are available in a given park?",
        "What is the average temperature in a park during a month?",
        "How much rainfall is expected in a park on a given date?",
        "Which parks match all of the traveller's preferences?",
        "What is the location of a park?",
        "Which parks are closed during winter?",
        "Which services provide weather data for a park?",
        "When is the best time to visit a given park?",
        "Which park is least crowded and has good weather on the travel dates?",
        "How many parks are within the given travel distance?",
        "Which facilities does a park provide?",
    ],
    ("wtgw", "gpt", "gpt-4.1"): [
        "What parks are located within a certain distance from the user's location?",
        "What is the weather forecast for a park on specific dates?",
        "How crowded is a park expected to be on specific dates?",
        "What activities does each park offer?",
        "Which parks support hiking and camping?",
        "What are the entrance fees for each park?",
        "What are the park's opening hours?",
        "Is the park accessible for people with disabilities?",
        "Which parks are recommended for a given set of preferences?",
        "How are the recommended parks ranked?",
        "What historical visitor data is available for each park?",
        "What alternative dates are suggested when no park matches?",
        "Which park has the best weather during the requested dates?",
        "Which park has the lowest expected crowd level?",
        "What is the distance between the user and each park?",
        "Which parks offer wildlife viewing opportunities?",
        "What is the typical weather in a park for each season?",
        "Which parks are open on the requested dates?",
        "What information is shown with each recommended park?",
        "Which parks match the user's preferred activities?",
    ],
    ("wtgw", "llama31-8b", "llama-3.1-8b"): [
        "What is the weather like in the park?",
        "How crowded is the park?",
        "Where is the park located?",
        "What activities can visitors do in the park?",
        "What is the best time to visit the park?",
        "How much does it cost to enter the park?",
        "Which park should the user visit?",
        "Is the park open?",
    ],
    ("pjo", "kimik2", "kimi-k2"): [
        "Which articles about a political topic were published by an outlet in a time period?",
        "Who is the author of an article?",
        "When was an article published?",
        "In which section of the outlet did the article appear?",
        "Which politicians are mentioned in an article?",
        "Which parties are mentioned in an article?",
        "Which policies are discussed in an article?",
        "What sentiment does an article express toward a party?",
        "How is a politician framed in an article?",
        "How does the volume of coverage of a topic differ between outlets?",
        "How does the tone of coverage of a party change over time?",
        "Who owns a news outlet?",
        "What is the declared political leaning of an outlet?",
        "Which outlets show a consistently negative tone toward a party?",
        "Is there a relation between an outlet's owner and the tone of its coverage?",
        "Which claims in an article were checked by a fact-checking service?",
        "What verdict did the fact-checking service give for a claim?",
        "Which outlets published the most articles about a policy?",
        "How many articles mention both a politician and a policy?",
        "Which authors write most frequently about a party?",
    ],
    ("pdto", "llama32-3b", "llama-3.2-3b"): [
        "What are the demographic characteristics of the patient, including age, sex and ethnicity, that may influence the response to antidepressant treatment?",
        "Which pharmacogenetic variants identified in the patient's genetic test results affect the metabolism of candidate antidepressant medications?",
        "What prior treatments has the patient received for major depressive disorder and what was the outcome of each treatment?",
        "Which clinical trials have studied treatments in patients with similar demographics and genotypes to the current patient?",
        "What is the estimated likelihood of response to each candidate medication given the patient's genotype and treatment history?",
        "What side effects are expected for each candidate medication based on the patient's genetic profile and comorbidities?",
        "Which comorbidities of the patient should be considered when selecting a depression treatment plan?",
        "What evidence from clinical trial registries supports the recommended treatment option for the patient?",
        "When should the clinician refer the patient to a specialist because the available evidence is insufficient?",
        "How is the selected treatment plan and its supporting evidence recorded in the electronic health record of the patient?",
    ],
}


def main():
    (ROOT / "specs").mkdir(parents=True, exist_ok=True)
    (ROOT / "sets").mkdir(parents=True, exist_ok=True)
    for spec in SPECS:
        path = ROOT / "specs" / f"{spec['spec_id']}.json"
        path.write_text(json.dumps(spec, indent=2, ensure_ascii=False) + "\n")
    for (spec_id, provider, model), texts in SETS.items():
        assert len(set(texts)) == len(texts), (spec_id, provider)
        set_id = f"{spec_id}.{provider}"
        lines = []
        for i, text in enumerate(texts, 1):
            lines.append(json.dumps({
                "cq_id": f"{set_id}-{i:03d}",
                "text": text,
                "set_id": set_id,
                "spec_id": spec_id,
                "model_id": f"stand-in/{model}",
                "decoding": DECODING,
                "created_at": CREATED_AT,
            }, ensure_ascii=False))
        (ROOT / "sets" / f"{set_id}.jsonl").write_text("\n".join(lines) + "\n")
        print(f"{set_id}: {len(texts)}")


if __name__ == "__main__":
    main()
