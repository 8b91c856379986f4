"""Seeded synthetic corpora with recorded ground truth.

The generator plants forwarding communities, resource links drawn from its own
catalog, per-channel languages, a day with a burst of channel creations and
monetization links.  Every planted quantity is recorded in ``GroundTruth`` so
tests can compare pipeline output against it exactly.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .ingest import (
    RESOURCE_KINDS,
    ChannelRecord,
    MessageRecord,
    ResourceCatalog,
    ResourceEntry,
    write_catalog,
    write_corpus,
)

SENTENCES = {
    "en": [
        "The truth about what happened will come out soon and everyone will see it.",
        "They do not want you to know what is really going on behind closed doors.",
        "Share this message with your friends and family before it gets deleted.",
        "We have been watching the news all week and nothing they say makes sense.",
        "The people deserve to hear the whole story without any censorship at all.",
        "Remember to stay strong and keep asking questions about everything you hear.",
        "This is the most important video you will watch this year, please share it.",
        "Our community keeps growing every day because people are waking up.",
    ],
    "de": [
        "Die Wahrheit über diese Ereignisse wird bald ans Licht kommen.",
        "Sie wollen nicht, dass ihr wisst, was hinter verschlossenen Türen passiert.",
        "Teilt diese Nachricht mit euren Freunden, bevor sie gelöscht wird.",
        "Wir haben die ganze Woche die Nachrichten verfolgt und nichts ergibt einen Sinn.",
        "Die Menschen haben ein Recht darauf, die ganze Geschichte ohne Zensur zu hören.",
        "Bleibt stark und stellt weiterhin Fragen zu allem, was ihr hört.",
        "Unsere Gemeinschaft wächst jeden Tag, weil immer mehr Leute aufwachen.",
        "Dieses Video ist das wichtigste, das ihr in diesem Jahr sehen werdet.",
    ],
    "es": [
        "La verdad sobre lo que ocurrió saldrá a la luz muy pronto.",
        "No quieren que sepas lo que realmente está pasando detrás de las puertas cerradas.",
        "Comparte este mensaje con tus amigos y tu familia antes de que lo borren.",
        "Hemos estado viendo las noticias toda la semana y nada tiene sentido.",
        "La gente merece conocer toda la historia sin ningún tipo de censura.",
        "Mantente fuerte y sigue haciendo preguntas sobre todo lo que escuchas.",
        "Nuestra comunidad crece cada día porque la gente está despertando.",
        "Este es el vídeo más importante que verás este año, por favor compártelo.",
    ],
    "pt": [
        "A verdade sobre o que aconteceu vai aparecer muito em breve.",
        "Eles não querem que você saiba o que realmente está acontecendo por trás das portas fechadas.",
        "Compartilhe esta mensagem com seus amigos e sua família antes que ela seja apagada.",
        "Estivemos acompanhando as notícias a semana toda e nada faz sentido.",
        "O povo merece ouvir a história completa sem nenhuma censura.",
        "Continue forte e continue fazendo perguntas sobre tudo o que você ouve.",
        "Nossa comunidade cresce a cada dia porque as pessoas estão acordando.",
        "Este é o vídeo mais importante que você vai assistir este ano, compartilhe.",
    ],
    "it": [
        "La verità su quello che è successo verrà fuori molto presto.",
        "Non vogliono che tu sappia cosa sta succedendo davvero dietro le porte chiuse.",
        "Condividi questo messaggio con i tuoi amici e la tua famiglia prima che venga cancellato.",
        "Abbiamo seguito le notizie per tutta la settimana e niente ha senso.",
        "Le persone meritano di conoscere tutta la storia senza alcuna censura.",
        "Resta forte e continua a fare domande su tutto quello che senti.",
        "La nostra comunità cresce ogni giorno perché la gente si sta svegliando.",
        "Questo è il video più importante che guarderai quest'anno, condividilo.",
    ],
    "fr": [
        "La vérité sur ce qui s'est passé va bientôt éclater au grand jour.",
        "Ils ne veulent pas que vous sachiez ce qui se passe vraiment derrière les portes closes.",
        "Partagez ce message avec vos amis et votre famille avant qu'il ne soit supprimé.",
        "Nous avons suivi les informations toute la semaine et rien n'a de sens.",
        "Les gens méritent d'entendre toute l'histoire sans aucune censure.",
        "Restez forts et continuez à poser des questions sur tout ce que vous entendez.",
        "Notre communauté grandit chaque jour parce que les gens se réveillent.",
        "C'est la vidéo la plus importante que vous regarderez cette année, partagez-la.",
    ],
    "nl": [
        "De waarheid over wat er gebeurd is komt binnenkort aan het licht.",
        "Ze willen niet dat je weet wat er echt achter gesloten deuren gebeurt.",
        "Deel dit bericht met je vrienden en familie voordat het wordt verwijderd.",
        "We hebben de hele week het nieuws gevolgd en niets is logisch.",
        "Mensen verdienen het om het hele verhaal te horen zonder censuur.",
        "Blijf sterk en blijf vragen stellen over alles wat je hoort.",
        "Onze gemeenschap groeit elke dag omdat mensen wakker worden.",
        "Dit is de belangrijkste video die je dit jaar zult zien, deel hem alsjeblieft.",
    ],
    "ru": [
        "Правда о том, что произошло, очень скоро выйдет наружу.",
        "Они не хотят, чтобы вы знали, что на самом деле происходит за закрытыми дверями.",
        "Поделитесь этим сообщением с друзьями и семьёй, пока его не удалили.",
        "Мы всю неделю следили за новостями, и ничего не имеет смысла.",
        "Люди заслуживают услышать всю историю без всякой цензуры.",
        "Оставайтесь сильными и продолжайте задавать вопросы обо всём, что слышите.",
        "Наше сообщество растёт каждый день, потому что люди просыпаются.",
        "Это самое важное видео, которое вы увидите в этом году, поделитесь им.",
    ],
    "pl": [
        "Prawda o tym, co się wydarzyło, wkrótce wyjdzie na jaw.",
        "Nie chcą, żebyście wiedzieli, co naprawdę dzieje się za zamkniętymi drzwiami.",
        "Udostępnijcie tę wiadomość znajomym i rodzinie, zanim zostanie usunięta.",
        "Przez cały tydzień śledziliśmy wiadomości i nic nie ma sensu.",
        "Ludzie zasługują na to, żeby poznać całą historię bez żadnej cenzury.",
        "Bądźcie silni i nadal zadawajcie pytania o wszystko, co słyszycie.",
        "Nasza społeczność rośnie każdego dnia, ponieważ ludzie się budzą.",
        "To najważniejszy film, jaki zobaczycie w tym roku, udostępnijcie go.",
    ],
    "sv": [
        "Sanningen om vad som hände kommer snart fram i ljuset.",
        "De vill inte att du ska veta vad som verkligen pågår bakom stängda dörrar.",
        "Dela det här meddelandet med dina vänner och din familj innan det raderas.",
        "Vi har följt nyheterna hela veckan och ingenting är begripligt.",
        "Människor förtjänar att höra hela historien utan någon censur.",
        "Var starka och fortsätt att ställa frågor om allt ni hör.",
        "Vår gemenskap växer varje dag eftersom människor vaknar.",
        "Det här är den viktigaste videon du kommer att se i år, dela den gärna.",
    ],
}

# Valid sample addresses (checksums verified in the test suite).
SAMPLE_ADDRESSES = [
    "1A1zP1eP5QGefi2DMPTfTL5SLmv7DivfNa",
    "3J98t1WpEZ73CNmQviecrnyiWrnqRhWNLy",
    "bc1qw508d6qejxtdg4y5r3zarvary0c5xw7kv8f3t4",
    "0x5aAeb6053F3E94C9b9A09f33669435E7Ef1BeAed",
]

_ID_CHARS = np.array(list("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_"))
_TRAILERS = ["", "", "", ".", ",", ")", "!"]


@dataclass
class SyntheticParams:
    n_channels: int = 200
    n_messages: int = 4000
    n_communities: int = 8
    conspiracy_communities: int = 2
    flagged_in: float = 0.7       # share of conspiracy-community channels posting resources
    flagged_out: float = 0.02     # same share elsewhere
    forward_rate: float = 0.25    # share of messages that are forwards
    forward_in: float = 0.92      # share of forwards taken from the own community
    external_forward_rate: float = 0.01
    url_rate: float = 0.15        # share of messages carrying a background link
    shortener_rate: float = 0.05  # share of background links that are shortened
    monetization_rate: float = 0.3  # share of conspiracy channels posting monetization links
    shared_funding: int = 3       # funding links also posted outside conspiracy communities
    foreign_message_rate: float = 0.05
    start: str = "2019-01-01"
    days: int = 60
    spike_day: int = 37
    spike_fraction: float = 0.15
    catalog_size: int = 40        # entries per resource kind
    seed: int = 0


@dataclass
class GroundTruth:
    params: dict
    membership: dict[int, int]
    conspiracy_communities: list[int]
    channel_language: dict[int, str]
    flagged_channels: list[int]
    resource_urls: dict[str, int]
    resource_unique_urls: dict[str, int]
    resource_identifiers: dict[str, int]
    resource_channels: dict[str, int]
    creation_per_day: dict[str, int]
    spike_date: str
    monetization: list[dict] = field(default_factory=list)
    external_forwards: int = 0
    self_forwards: int = 0

    def to_json(self) -> dict:
        d = asdict(self)
        d["membership"] = {str(k): v for k, v in self.membership.items()}
        d["channel_language"] = {str(k): v for k, v in self.channel_language.items()}
        return d

    @classmethod
    def from_json(cls, d: dict) -> "GroundTruth":
        d = dict(d)
        d["membership"] = {int(k): v for k, v in d["membership"].items()}
        d["channel_language"] = {int(k): v for k, v in d["channel_language"].items()}
        return cls(**d)


@dataclass
class SyntheticCorpus:
    corpus: list[ChannelRecord]
    catalog: ResourceCatalog
    truth: GroundTruth

    def write(self, directory) -> dict[str, Path]:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        paths = {"corpus": d / "corpus.jsonl", "catalog": d / "catalog.csv", "truth": d / "truth.json"}
        write_corpus(self.corpus, paths["corpus"])
        write_catalog(self.catalog, paths["catalog"])
        with open(paths["truth"], "w", encoding="utf-8") as fh:
            json.dump(self.truth.to_json(), fh, indent=1, sort_keys=True)
            fh.write("\n")
        return paths


def _ident(rng, n: int) -> str:
    return "".join(_ID_CHARS[rng.integers(0, len(_ID_CHARS), n)])


def _make_catalog(rng, size: int) -> dict[str, list[str]]:
    ids = {
        "youtube_video": sorted({_ident(rng, 11) for _ in range(size)}),
        "youtube_channel": sorted({"UC" + _ident(rng, 22) for _ in range(size)}),
        "subreddit": [f"truthsub{i}" for i in range(size)],
        "voat_subverse": [f"verse{i}" for i in range(size)],
        "chan_board": [f"board{i}" for i in range(size)],
        "website_domain": [f"hiddennews{i}.com" for i in range(size)],
    }
    return ids


def _resource_url(rng, kind: str, ident: str) -> str:
    """Canonical (already normalized) URL pointing at ``ident``."""
    r = int(rng.integers(0, 4))
    n = int(rng.integers(1, 10_000))
    if kind == "youtube_video":
        return [f"https://www.youtube.com/watch?v={ident}", f"https://youtu.be/{ident}",
                f"https://youtube.com/shorts/{ident}", f"https://m.youtube.com/watch?v={ident}&t=30"][r]
    if kind == "youtube_channel":
        return [f"https://www.youtube.com/channel/{ident}", f"https://youtube.com/channel/{ident}/videos"][r % 2]
    if kind == "subreddit":
        return [f"https://www.reddit.com/r/{ident}/", f"https://old.reddit.com/r/{ident}/comments/x{n}/"][r % 2]
    if kind == "voat_subverse":
        return f"https://voat.co/v/{ident}/{n}"
    if kind == "chan_board":
        return f"https://8kun.top/{ident}/res/{n}.html"
    return [f"https://www.{ident}/article/{n}", f"https://{ident}/", f"https://live.{ident}/p/{n}"][r % 3]


_FUNDING_TEMPLATES = [
    ("donation", "Patreon", "https://www.patreon.com/{slug}", "{slug}"),
    ("donation", "SubscribeStar", "https://www.subscribestar.com/{slug}", "{slug}"),
    ("donation", "BuyMeACoffee", "https://www.buymeacoffee.com/{slug}", "{slug}"),
    ("crowdfunding", "GiveSendGo", "https://www.givesendgo.com/{slug}", "{slug}"),
    ("crowdfunding", "GoFundMe", "https://www.gofundme.com/f/{slug}", "{slug}"),
    ("crowdfunding", "Kickstarter", "https://www.kickstarter.com/projects/{slug}/film", "{slug}/film"),
]


def _monetization_url(rng, channel_index: int) -> tuple[str, str, str, str]:
    """(url, category, platform, extracted id) for one planted monetization link."""
    r = int(rng.integers(0, 10))
    slug = f"creator{channel_index}"
    if r < 3:
        tag = f"chan{channel_index}-20"
        return f"https://www.amazon.com/dp/B0{channel_index:08d}?tag={tag}", "affiliate", "Amazon", tag
    if r == 3:
        return f"https://www.amazon.com/shop/{slug}", "shopfront", "Amazon", slug
    if r == 4:
        lst = f"LIST{channel_index}"
        return f"https://www.amazon.com/hz/wishlist/ls/{lst}", "wishlist", "Amazon", lst
    if r == 5:
        reg = f"{slug}news.com"
        return f"https://shop.{reg}/item/{channel_index}", "custom_shop", reg, reg
    cat, platform, tmpl, ident = _FUNDING_TEMPLATES[int(rng.integers(0, len(_FUNDING_TEMPLATES)))]
    return tmpl.format(slug=slug), cat, platform, ident.format(slug=slug)


def generate(params: SyntheticParams | None = None, **overrides) -> SyntheticCorpus:
    """Build a corpus, its resource catalog and the planted ground truth."""
    p = params or SyntheticParams()
    if overrides:
        p = SyntheticParams(**{**asdict(p), **overrides})
    rng = np.random.default_rng(p.seed)
    n = p.n_channels
    langs = list(SENTENCES)

    ids = np.sort(rng.choice(np.arange(10_000, 10_000 + 50 * n), size=n, replace=False)).astype(int)
    perm = rng.permutation(n)
    comm = np.empty(n, dtype=int)
    for c, block in enumerate(np.array_split(perm, p.n_communities)):
        comm[block] = c
    members = [np.flatnonzero(comm == c) for c in range(p.n_communities)]
    conspiracy = list(range(p.conspiracy_communities))
    in_consp = np.isin(comm, conspiracy)

    # languages: one per community, cycling through the bank
    chan_lang = [langs[comm[i] % len(langs)] for i in range(n)]

    # creation dates with a burst on the spike day
    start = datetime.fromisoformat(p.start).replace(tzinfo=timezone.utc)
    day = rng.integers(0, p.days, n)
    spike = rng.random(n) < p.spike_fraction
    day[spike] = p.spike_day
    created = [start + timedelta(days=int(d), seconds=int(s)) for d, s in zip(day, rng.integers(0, 86_400, n))]
    end = start + timedelta(days=p.days + 30)

    # message counts, at least one per channel
    counts = rng.multinomial(max(p.n_messages - n, 0), np.full(n, 1.0 / n)) + 1

    catalog_ids = _make_catalog(rng, p.catalog_size)
    catalog = ResourceCatalog(
        ResourceEntry(k, i, "synthetic") for k in RESOURCE_KINDS for i in catalog_ids[k]
    )
    flagged = rng.random(n) < np.where(in_consp, p.flagged_in, p.flagged_out)
    monetizing = in_consp & (rng.random(n) < p.monetization_rate)

    res_urls: Counter = Counter()
    res_unique = defaultdict(set)
    res_idents = defaultdict(set)
    res_chans = defaultdict(set)
    monetization = []
    external = 0
    sentences = {l: SENTENCES[l] for l in langs}
    bank_size = len(SENTENCES["en"])

    planted_funding: list[tuple[str, str, str, str]] = []
    corpus = []
    for i in range(n):
        cid = int(ids[i])
        k = int(counts[i])
        span = max((end - created[i]).total_seconds(), 1.0)
        offsets = np.sort(rng.random(k)) * span
        lang_pick = np.where(rng.random(k) < p.foreign_message_rate, rng.integers(0, len(langs), k), -1)
        s1 = rng.integers(0, bank_size, k)
        s2 = rng.integers(0, bank_size, k)
        two = rng.random(k) < 0.5
        fwd = rng.random(k) < p.forward_rate
        fwd_in = rng.random(k) < p.forward_in
        ext = rng.random(k) < p.external_forward_rate
        bg = rng.random(k) < p.url_rate
        short = rng.random(k) < p.shortener_rate
        own = members[comm[i]]

        # messages receiving planted resource / monetization links
        extra: dict[int, list[str]] = defaultdict(list)
        if flagged[i]:
            for _ in range(int(rng.integers(1, 4))):
                kind = RESOURCE_KINDS[int(rng.integers(0, len(RESOURCE_KINDS)))]
                ident = catalog_ids[kind][int(rng.integers(0, len(catalog_ids[kind])))]
                url = _resource_url(rng, kind, ident)
                extra[int(rng.integers(0, k))].append(url + _TRAILERS[int(rng.integers(0, len(_TRAILERS)))])
                res_urls[kind] += 1
                res_unique[kind].add(url)
                res_idents[kind].add(ident)
                res_chans[kind].add(cid)
        if monetizing[i]:
            url, cat, platform, ident = _monetization_url(rng, i)
            mid = int(rng.integers(0, k))
            extra[mid].append(url)
            monetization.append({"channel_id": cid, "message_index": mid, "category": cat,
                                 "platform": platform, "extracted_id": ident, "url": url})
            if cat in ("donation", "crowdfunding"):
                planted_funding.append((url, cat, platform, ident))

        msgs = []
        for j in range(k):
            lang = chan_lang[i] if lang_pick[j] < 0 else langs[int(lang_pick[j])]
            bank = sentences[lang]
            text = bank[s1[j]] if not two[j] else bank[s1[j]] + " " + bank[s2[j]]
            forwarded_from = None
            if fwd[j]:
                if ext[j]:
                    forwarded_from = int(rng.integers(1, 9_999))
                    external += 1
                else:
                    pool = own if (fwd_in[j] and len(own) > 1) else None
                    src = int(pool[rng.integers(0, len(pool))]) if pool is not None else int(rng.integers(0, n))
                    if src == i:
                        src = (i + 1) % n
                    forwarded_from = int(ids[src])
            if bg[j]:
                if short[j]:
                    text += f" https://bit.ly/{_ident(rng, 7)}"
                else:
                    text += f" https://www.dailyreport{int(rng.integers(0, 500))}.net/story/{j}"
            for url in extra.get(j, ()):
                text += " " + url
            msgs.append(MessageRecord(j + 1, created[i] + timedelta(seconds=float(offsets[j])), text, forwarded_from))
        desc = f"Channel {cid}"
        if monetizing[i] and rng.random() < 0.5:
            desc += " donations welcome: " + SAMPLE_ADDRESSES[i % len(SAMPLE_ADDRESSES)]
        corpus.append(ChannelRecord(cid, f"channel {cid}", desc, created[i], f"chan{cid}", msgs))

    # a few funding links also appear outside conspiracy communities
    outside = np.flatnonzero(~in_consp)
    shared = []
    for url, cat, platform, ident in planted_funding[: p.shared_funding]:
        if len(outside) == 0:
            break
        i = int(outside[rng.integers(0, len(outside))])
        ch = corpus[i]
        last = ch.messages[-1]
        ch.messages[-1] = MessageRecord(last.message_id, last.timestamp, last.text + " " + url, last.forwarded_from)
        shared.append(url)
        monetization.append({"channel_id": ch.channel_id, "message_index": len(ch.messages) - 1,
                             "category": cat, "platform": platform, "extracted_id": ident, "url": url})

    per_day = Counter(c.date().isoformat() for c in created)
    truth = GroundTruth(
        params=asdict(p),
        membership={int(ids[i]): int(comm[i]) for i in range(n)},
        conspiracy_communities=conspiracy,
        channel_language={int(ids[i]): chan_lang[i] for i in range(n)},
        flagged_channels=sorted(int(ids[i]) for i in np.flatnonzero(flagged)),
        resource_urls={k: res_urls.get(k, 0) for k in RESOURCE_KINDS},
        resource_unique_urls={k: len(res_unique[k]) for k in RESOURCE_KINDS},
        resource_identifiers={k: len(res_idents[k]) for k in RESOURCE_KINDS},
        resource_channels={k: len(res_chans[k]) for k in RESOURCE_KINDS},
        creation_per_day=dict(sorted(per_day.items())),
        spike_date=(start + timedelta(days=p.spike_day)).date().isoformat(),
        monetization=monetization,
        external_forwards=external,
    )
    return SyntheticCorpus(corpus, catalog, truth)
