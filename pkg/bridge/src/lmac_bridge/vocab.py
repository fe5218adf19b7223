"""Character vocabulary: a-z, space, and EOS."""

ALPHABET = "abcdefghijklmnopqrstuvwxyz "
CHAR_TO_ID = {c: i for i, c in enumerate(ALPHABET)}
EOS_ID = len(ALPHABET)
VOCAB_SIZE = len(ALPHABET) + 1


def encode_text(text: str) -> tuple[list[int], bool]:
    """Map text to ids; unmappable characters become id 0 and set the
    lossy flag so callers can reject the round trip honestly."""
    ids = []
    lossy = False
    for ch in text:
        idx = CHAR_TO_ID.get(ch)
        if idx is None:
            lossy = True
            idx = 0
        ids.append(idx)
    return ids, lossy


def decode_ids(ids) -> str:
    return "".join(ALPHABET[i] for i in ids)
