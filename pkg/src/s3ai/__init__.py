"""Single-site integration of relational databases as virtual RDF graphs.

The stack: auto-generated RDB-to-RDF mapping documents, a SPARQL-to-SQL
virtual graph engine, per-database SPARQL protocol endpoints with linked
data dereferencing, ontology alignment of the generated vocabularies, and
a federation gateway that unifies answers from all registered sites.
"""

__version__ = "0.1.0"
