import pytest

from rhymekit import LookupTranscriber, corpus_from_dict

LIMERICK_LINES = [
    "There was an Old Man with a beard,",
    "Who said, 'It is just as I feared!",
    "Two Owls and a Hen,",
    "Four Larks and a Wren,",
    "Have all built their nests in my beard!'",
]

LIMERICK_LEXICON = {
    "there": "ðɛə", "was": "wɒz", "an": "ən", "old": "əʊld", "man": "mæn",
    "with": "wɪð", "a": "ə", "beard": "ˈbɪəd", "who": "huː", "said": "sɛd",
    "it": "ɪt", "is": "ɪz", "just": "dʒʌst", "as": "əz", "i": "aɪ",
    "feared": "ˈfɪəd", "two": "tuː", "owls": "aʊlz", "and": "ənd",
    "hen": "ˈhɛn", "four": "fɔː", "larks": "lɑːks", "wren": "ˈrɛn",
    "have": "hæv", "all": "ɔːl", "built": "bɪlt", "their": "ðɛə",
    "nests": "nɛsts", "in": "ɪn", "my": "maɪ",
}


@pytest.fixture
def limerick_corpus():
    return corpus_from_dict({
        "language": "en",
        "poems": [{"id": "limerick", "title": None, "stanzas": [LIMERICK_LINES]}],
    })


@pytest.fixture
def limerick_poem(limerick_corpus):
    return limerick_corpus.poems[0]


@pytest.fixture
def limerick_transcriber():
    return LookupTranscriber(LIMERICK_LEXICON, "en")
