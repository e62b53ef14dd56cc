#!/usr/bin/env python3
"""
Hierarquia de erros do simulador EDUR

Todas as operações públicas levantam subclasses de EdurError; apenas a camada
de linha de comando (experiment.py) captura e converte em códigos de saída.
"""


class EdurError(Exception):
    """Erro base do simulador"""


class PreconditionError(EdurError, ValueError):
    """Entrada viola a pré-condição documentada da operação"""


class NotPSDError(PreconditionError):
    """Matriz com autovalor negativo além da tolerância"""


class RangeError(PreconditionError):
    """Parâmetro fora do intervalo permitido"""


class DomainError(EdurError, ArithmeticError):
    """Radicando negativo na avaliação de uma desigualdade"""


class ConsistencyError(EdurError, RuntimeError):
    """Duas formas equivalentes do mesmo cálculo discordam"""


class AccuracyError(EdurError, RuntimeError):
    """Quadratura não convergiu na tolerância exigida"""


class EmptyDataError(EdurError, ZeroDivisionError):
    """Tabela de contagens sem nenhuma intensidade"""


class ProtocolIncompleteError(EdurError, LookupError):
    """Execução do método dos três estados sem todas as tabelas"""


class ConfigError(EdurError, ValueError):
    """Configuração ou argumento de linha de comando inválido"""
