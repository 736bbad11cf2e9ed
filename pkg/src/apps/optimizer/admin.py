from django.contrib import admin

from .models import OptimizationRun, ParetoSolution


class ParetoSolutionInline(admin.TabularInline):
    model = ParetoSolution
    extra = 0
    fields = ['sample_index', 'e_force', 'e_velocity', 'is_balanced']
    readonly_fields = fields


@admin.register(OptimizationRun)
class OptimizationRunAdmin(admin.ModelAdmin):
    list_display = ['scenario_name', 'mode', 'wires', 'relays', 'gravity', 'seed', 'evaluations', 'created_at']
    list_filter = ['mode', 'gravity']
    search_fields = ['scenario_name']
    inlines = [ParetoSolutionInline]


admin.site.register(ParetoSolution)
