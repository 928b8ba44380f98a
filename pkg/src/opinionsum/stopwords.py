"""Fixed English stop-word list used when ranking seed-word candidates.

Entries match the tokenizer's output, so contraction fragments appear as
bare pieces ("don" / "t") rather than apostrophized forms.
"""

STOPWORDS = frozenset("""
a about above after again against all am an and any are aren as at be because
been before being below between both but by can cannot could couldn did didn
do does doesn doing don down during each few for from further had hadn has
hasn have haven having he her here hers herself him himself his how i if in
into is isn it its itself just ll let me more most mustn my myself no nor not
now of off on once only or other ought our ours ourselves out over own re s
same shan she should shouldn so some such t than that the their theirs them
themselves then there these they this those through to too under until up
very ve was wasn we were weren what when where which while who whom why will
with won would wouldn you your yours yourself yourselves
""".split())
