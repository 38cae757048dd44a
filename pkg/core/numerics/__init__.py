"""Noyau numérique : espaces de fonctions échantillonnées, matricant, opérateurs aux limites, analyse de Fredholm."""
